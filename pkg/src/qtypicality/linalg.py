"""Dense complex linear algebra for composite quantum systems.

Everything here operates on plain ``numpy`` arrays of ``complex128``.
The project-wide tensor convention is fixed in one place: the system
index is the slow (outer) index of the composite Hilbert space, so the
basis state ``|s> ⊗ |e>`` sits at flat index ``composite_index(s, e,
dim_e) = s * dim_e + e``.  Every reshape/kron/partial-trace in the
package goes through this convention.
"""

from typing import NamedTuple

import numpy as np

# Largest composite Hilbert-space dimension handled as a dense matrix.
# dim 4096 complex doubles = 256 MiB per matrix, the practical ceiling
# for exact diagonalization on a laptop.
MAX_DENSE_DIM = 4096

# Admission tolerance for "is this matrix Hermitian", relative to its
# Frobenius norm (double precision, dims up to ~4000).
HERMITICITY_RTOL = 1e-9


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within the admission tolerance."""


class EigendecompositionError(RuntimeError):
    """The LAPACK eigensolver failed to converge."""


class Eigensystem(NamedTuple):
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def composite_index(s: int, e: int, dim_e: int) -> int:
    """Flat index of ``|s> ⊗ |e>``; system is the slow index."""
    return s * dim_e + e


def hermiticity_defect(a: np.ndarray) -> float:
    """Relative Frobenius distance of ``a`` from its Hermitian part."""
    a = np.asarray(a)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - a.conj().T) / scale)


def check_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """Validate a square Hermitian matrix and return it as complex128.

    Raises :class:`NonHermitianError` with the measured defect if the
    matrix is further than ``rtol`` (relative Frobenius) from Hermitian.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    defect = hermiticity_defect(a)
    if defect > rtol:
        raise NonHermitianError(
            f"matrix is not Hermitian: relative defect {defect:.3e} > {rtol:.1e}"
        )
    return a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return ``(a + a†)/2``."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def eigh(a: np.ndarray) -> Eigensystem:
    """Eigendecomposition of a Hermitian matrix, reproducible by construction.

    Eigenvalues come out ascending.  Each eigenvector is phase-fixed so
    that its largest-modulus component (first such index on ties) is
    real and positive, which pins the output even in the presence of
    degeneracies and makes regression tests byte-stable.
    """
    a = check_hermitian(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"eigh failed to converge: {exc}") from exc
    # phase fixing: rotate each column so its dominant component is real > 0
    idx = np.argmax(np.abs(v), axis=0)
    dominant = v[idx, np.arange(v.shape[1])]
    phases = dominant / np.abs(dominant)
    v = v * phases.conj()[np.newaxis, :]
    return Eigensystem(w, v)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the system-slow index convention.

    Element ``(a*rows_b + c, b*cols_b + d)`` equals ``A[a, b] * B[c, d]``,
    i.e. the left factor is the slow index.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > MAX_DENSE_DIM:
        raise ValueError(
            f"kron result {rows}x{cols} exceeds the dense-storage cap "
            f"({MAX_DENSE_DIM}); refusing to allocate"
        )
    return np.kron(a, b)


def partial_trace_env(rho: np.ndarray, dim_s: int, dim_e: int) -> np.ndarray:
    """Trace out the environment factor of an operator on ``H_s ⊗ H_e``.

    ``rho`` must be ``(dim_s*dim_e) x (dim_s*dim_e)`` under the
    system-slow ordering; the result is ``dim_s x dim_s`` with the same
    trace.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = dim_s * dim_e
    if rho.shape != (dim, dim):
        raise ValueError(
            f"operator shape {rho.shape} does not match dim_s*dim_e = {dim}"
        )
    return np.einsum("aebe->ab", rho.reshape(dim_s, dim_e, dim_s, dim_e))


def frobenius_norm_sq(a: np.ndarray) -> float:
    """Squared Frobenius norm, i.e. the trace of ``A A†``."""
    a = np.asarray(a)
    return float(np.sum(np.abs(a) ** 2))
