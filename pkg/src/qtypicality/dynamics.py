"""Composite Hamiltonians, exact unitary propagation, reduced states.

Units: ħ = 1 throughout, so time and inverse energy coincide.  The
system and environment Hamiltonians are diagonal in the working basis
(their own eigenbasis); all coupling lives in the interaction matrix.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .linalg import (
    MAX_DENSE_DIM,
    check_hermitian,
    composite_index,
    eigh,
    frobenius_norm_sq,
    partial_trace_env,
)

NORM_TOL = 1e-10
TRACE_TOL = 1e-10
EIGVAL_FLOOR = -1e-10

# Full density-matrix propagation scales as dim² memory; above this we
# refuse and require a pure-state decomposition chosen by the caller.
MAX_DENSITY_DIM = 512


class PhysicalityError(RuntimeError):
    """A state violated unitarity or reduced-density-matrix physicality."""


@dataclass(frozen=True)
class CompositeSystem:
    """System ⊗ environment with diagonal bare Hamiltonians.

    ``spectrum_s`` and ``spectrum_e`` are the bare energies; their outer
    sum under the system-slow ordering is the non-interacting
    Hamiltonian.
    """

    spectrum_s: np.ndarray
    spectrum_e: np.ndarray

    def __post_init__(self):
        for name in ("spectrum_s", "spectrum_e"):
            spec = np.asarray(getattr(self, name), dtype=float)
            if spec.ndim != 1 or spec.size < 1:
                raise ValueError(f"{name} must be a non-empty 1-d real vector")
            if not np.all(np.isfinite(spec)):
                raise ValueError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, spec)
        if self.dim > MAX_DENSE_DIM:
            raise ValueError(
                f"composite dimension {self.dim} exceeds the dense cap {MAX_DENSE_DIM}"
            )

    @property
    def dim_s(self) -> int:
        return self.spectrum_s.size

    @property
    def dim_e(self) -> int:
        return self.spectrum_e.size

    @property
    def dim(self) -> int:
        return self.dim_s * self.dim_e


def gaussian_environment_spectrum(dim_e: int, sigma_e: float) -> np.ndarray:
    """Deterministic Gaussian-density environment spectrum.

    Level ``k`` is ``sigma_e * Phi^{-1}((k+1/2)/dim_e)`` with ``Phi`` the
    standard normal CDF, antisymmetrized so the mean is exactly zero.
    A quantile grid rather than a random draw keeps the environment
    density of states a fixed macroscopic input: the interaction matrix
    is the only source of randomness in an ensemble run.
    """
    if dim_e < 1:
        raise ValueError("dim_e must be >= 1")
    if not sigma_e > 0:
        raise ValueError("sigma_e must be > 0")
    levels = sigma_e * norm.ppf((np.arange(dim_e) + 0.5) / dim_e)
    return 0.5 * (levels - levels[::-1])


def two_level_system(gap: float, dim_e: int, sigma_e: float = 1.0) -> CompositeSystem:
    """Two-level system (energies 0 and ``gap``) in a Gaussian environment."""
    return CompositeSystem(
        spectrum_s=np.array([0.0, float(gap)]),
        spectrum_e=gaussian_environment_spectrum(dim_e, sigma_e),
    )


def build_h0(sys: CompositeSystem) -> np.ndarray:
    """Non-interacting Hamiltonian: diagonal of all pairwise energy sums."""
    return np.diag(
        np.add.outer(sys.spectrum_s, sys.spectrum_e).ravel().astype(complex)
    )


def nearest_level(spectrum: np.ndarray, target: float) -> int:
    """Index of the level closest to ``target`` (ties go to the lower level)."""
    spectrum = np.asarray(spectrum, dtype=float)
    return int(np.argmin(np.abs(spectrum - target)))


def product_state(sys: CompositeSystem, s_level: int, e_level: int) -> np.ndarray:
    """Basis product state ``|s_level> ⊗ |e_level>`` as a flat amplitude vector."""
    if not (0 <= s_level < sys.dim_s and 0 <= e_level < sys.dim_e):
        raise ValueError(
            f"levels ({s_level}, {e_level}) out of range for dims "
            f"({sys.dim_s}, {sys.dim_e})"
        )
    psi = np.zeros(sys.dim, dtype=complex)
    psi[composite_index(s_level, e_level, sys.dim_e)] = 1.0
    return psi


def evolve_pure(h: np.ndarray, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Exact propagation of a pure state under a time-independent Hamiltonian.

    One eigendecomposition is reused across all requested times:
    ``psi(t) = V exp(-i Λ t) V† psi0``.  Returns an array of shape
    ``(len(times), dim)``; the norm is verified at every time.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not np.all(np.isfinite(times)):
        raise ValueError("times contain non-finite entries")
    h = check_hermitian(h)
    if h.shape[0] != psi0.size:
        raise ValueError(f"dim mismatch: H is {h.shape}, psi0 has {psi0.size}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("psi0 is not normalized")
    w, v = eigh(h)
    coeffs = v.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, w))
    psis = (phases * coeffs) @ v.T
    norms = np.linalg.norm(psis, axis=1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > NORM_TOL:
        raise PhysicalityError(f"norm drift {worst:.3e} exceeds {NORM_TOL:.1e}")
    return psis


def evolve_density(h: np.ndarray, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Exact propagation of a (possibly mixed) density matrix.

    Full-matrix evolution costs dim² memory per time point, so it is
    capped at dim <= 512; decompose larger mixed states into pure runs
    instead.
    """
    rho0 = check_hermitian(rho0)
    dim = rho0.shape[0]
    if dim > MAX_DENSITY_DIM:
        raise ValueError(
            f"density propagation capped at dim {MAX_DENSITY_DIM}, got {dim}; "
            "decompose the initial state into pure states instead"
        )
    times = np.atleast_1d(np.asarray(times, dtype=float))
    h = check_hermitian(h)
    w, v = eigh(h)
    rho_eig = v.conj().T @ rho0 @ v
    out = np.empty((times.size, dim, dim), dtype=complex)
    for k, t in enumerate(times):
        phase = np.exp(-1j * w * t)
        out[k] = v @ (np.outer(phase, phase.conj()) * rho_eig) @ v.conj().T
    return out


def reduce_pure(psi: np.ndarray, dim_s: int, dim_e: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrix and reduced density matrix of a pure state.

    Reshaping the amplitudes by the system-slow ordering gives the
    ``dim_s x dim_e`` coefficient matrix ``gamma``; the reduced state of
    the system is ``gamma gamma†``, identical to the partial trace of
    the projector ``|psi><psi|``.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.size != dim_s * dim_e:
        raise ValueError(f"state length {psi.size} != dim_s*dim_e = {dim_s * dim_e}")
    gamma = psi.reshape(dim_s, dim_e)
    return gamma, gamma @ gamma.conj().T


@dataclass(frozen=True)
class Trajectory:
    """Reduced-state history of one interaction realization."""

    times: np.ndarray
    reduced: np.ndarray  # (n_times, dim_s, dim_s)
    populations: np.ndarray  # (n_times, dim_s), real
    stream: int | None = None

    @property
    def dim_s(self) -> int:
        return self.reduced.shape[1]


def validate_reduced_states(reduced: np.ndarray) -> dict:
    """Check physicality of a stack of reduced density matrices.

    Returns the worst-case diagnostics and raises
    :class:`PhysicalityError` if any of trace, Hermiticity or
    positivity is violated beyond tolerance.
    """
    traces = np.trace(reduced, axis1=1, axis2=2)
    max_trace_err = float(np.max(np.abs(traces - 1.0)))
    herm = reduced - np.conj(np.swapaxes(reduced, 1, 2))
    max_herm_err = float(np.max(np.sqrt(np.sum(np.abs(herm) ** 2, axis=(1, 2)))))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (reduced + np.conj(np.swapaxes(reduced, 1, 2))))))
    diag = {
        "max_trace_err": max_trace_err,
        "max_herm_err": max_herm_err,
        "min_eigval": min_eig,
    }
    if max_trace_err > TRACE_TOL:
        raise PhysicalityError(f"reduced-state trace error {max_trace_err:.3e}")
    if max_herm_err > TRACE_TOL:
        raise PhysicalityError(f"reduced-state Hermiticity error {max_herm_err:.3e}")
    if min_eig < EIGVAL_FLOOR:
        raise PhysicalityError(f"reduced-state eigenvalue {min_eig:.3e} below floor")
    return diag


def run_trajectory(
    sys: CompositeSystem,
    w: np.ndarray,
    psi0: np.ndarray,
    times: np.ndarray,
    stream: int | None = None,
    check: bool = True,
) -> Trajectory:
    """Evolve ``psi0`` under ``H0 + w`` and record the reduced state at each time."""
    w = check_hermitian(w)
    if w.shape[0] != sys.dim:
        raise ValueError(f"interaction dim {w.shape[0]} != composite dim {sys.dim}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    h = build_h0(sys) + w
    psis = evolve_pure(h, psi0, times)
    gammas = psis.reshape(times.size, sys.dim_s, sys.dim_e)
    reduced = gammas @ np.conj(np.swapaxes(gammas, 1, 2))
    populations = np.real(np.einsum("tss->ts", reduced))
    if check:
        validate_reduced_states(reduced)
        pop_err = float(np.max(np.abs(populations.sum(axis=1) - 1.0)))
        if pop_err > TRACE_TOL:
            raise PhysicalityError(f"population sum error {pop_err:.3e}")
    return Trajectory(times=times, reduced=reduced, populations=populations, stream=stream)


def gaussian_dos_stationary_populations(
    gap: float, eps_e: float, sigma_e: float
) -> tuple[float, float]:
    """Predicted stationary populations of a two-level system.

    Starting from the upper level with the environment at energy
    ``eps_e``, energy conservation puts the stationary weight of each
    system level at the environment density of states evaluated where
    the environment ends up: ``p0 ∝ dos(eps_e + gap)``,
    ``p1 ∝ dos(eps_e)``, normalized to ``p0 + p1 = 1``.
    """
    w0 = norm.pdf(eps_e + gap, scale=sigma_e)
    w1 = norm.pdf(eps_e, scale=sigma_e)
    total = w0 + w1
    return float(w0 / total), float(w1 / total)


def purity(rho: np.ndarray) -> float:
    """``Tr(rho²)`` for a Hermitian matrix."""
    return frobenius_norm_sq(rho)


__all__ = [
    "CompositeSystem",
    "PhysicalityError",
    "Trajectory",
    "build_h0",
    "evolve_density",
    "evolve_pure",
    "gaussian_dos_stationary_populations",
    "gaussian_environment_spectrum",
    "nearest_level",
    "partial_trace_env",
    "product_state",
    "purity",
    "reduce_pure",
    "run_trajectory",
    "two_level_system",
    "validate_reduced_states",
]
