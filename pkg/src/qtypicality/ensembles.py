"""Samplers for random interaction ensembles with a fixed spectrum variance.

Three families of Hermitian interaction matrices are provided, all
centered (``Tr W = 0``) and normalized so that the spectrum variance
``Tr(W²)/dim`` equals ``sigma_w²`` either exactly (per sample) or in
expectation:

* ``wigner``     -- independent Gaussian entries up to the symmetry
                    constraint (full matrix);
* ``wbrm``       -- a Wigner matrix modulated entrywise by a
                    deterministic band profile ``a((i-j)/b)``;
* ``rrm``        -- ``U D U†`` with a fixed real spectrum ``D`` and a
                    Haar-random unitary/orthogonal ``U``.

Entry conventions
-----------------
complex-hermitian: ``Re W_ij`` for ``i >= j`` and ``Im W_ij`` for
``i > j`` are independent centered Gaussians with standard deviation
``sigma_w / sqrt(2 dim)``; this gives ``E[Tr W²]/dim = sigma_w²`` up to
a ``1/(2 dim)`` diagonal correction removed by exact normalization.

real-symmetric: off-diagonal entries have variance ``sigma_w²/dim`` and
diagonal entries ``2 sigma_w²/dim``.  With this choice the matrix
measure is isotropic in the Hilbert-Schmidt metric on real symmetric
matrices, so its Poincaré constant is exactly ``dim/(2 sigma_w²)``.

Poincaré constants
------------------
Gradients throughout the package are taken with respect to an
orthonormal (Hilbert-Schmidt) basis of the Hermitian matrices.  In that
metric the product Gaussian measures above satisfy a Poincaré
inequality with constant

* ``dim / sigma_w²``      (complex-hermitian Wigner/WBRM: the largest
  coordinate variance is the off-diagonal one, ``sigma_w²/dim``);
* ``dim / (2 sigma_w²)``  (real-symmetric Wigner/WBRM, isotropic);
* ``dim / (2 sigma_D²)``  (randomly rotated matrices, via the Ricci
  curvature of the rotation orbit, with ``sigma_D² = Tr(D²)/dim``).

``dim/(2 sigma_w²)`` is a valid lower bound in every case and is the
one used by the headline fluctuation checks; the tighter
complex-Gaussian value is reported alongside it.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .linalg import check_hermitian, frobenius_norm_sq, hermitian_part

logger = logging.getLogger(__name__)

KINDS = ("wigner", "wbrm", "rrm")
SYMMETRIES = ("complex-hermitian", "real-symmetric")
NORMALIZATIONS = ("exact", "expectation")

#: Deterministic band profiles a(x), all with values in [0, 1] and a(0)=1.
BAND_PROFILES = {
    "hard": lambda x: (np.abs(x) <= 1.0).astype(float),
    "gaussian": lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / 2.0),
}


@dataclass(frozen=True)
class BandSpec:
    """Band profile id plus integer bandwidth for banded ensembles."""

    profile: str
    bandwidth: int

    def __post_init__(self):
        if self.profile not in BAND_PROFILES:
            raise ValueError(
                f"unknown band profile {self.profile!r}; "
                f"available: {sorted(BAND_PROFILES)}"
            )
        if int(self.bandwidth) < 1:
            raise ValueError("bandwidth must be a positive integer")


@dataclass(frozen=True)
class EnsembleSpec:
    """Description of one random interaction ensemble.

    ``sigma_w`` is the target spectrum variance ``sqrt(Tr(W²)/dim)``.
    ``band`` is required for ``wbrm``; ``fixed_spectrum`` (a centered
    real vector of length ``dim``) is required for ``rrm``.
    ``normalization`` selects per-sample exact rescaling of the
    spectrum variance ("exact") or the raw product measure
    ("expectation").
    """

    kind: str
    dim: int
    sigma_w: float
    symmetry: str = "complex-hermitian"
    band: BandSpec | None = None
    fixed_spectrum: np.ndarray | None = field(default=None, repr=False)
    normalization: str = "exact"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"unknown symmetry class {self.symmetry!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization mode {self.normalization!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.sigma_w > 0:
            raise ValueError("sigma_w must be > 0")
        if self.kind == "wbrm" and self.band is None:
            raise ValueError("wbrm requires band parameters (profile, bandwidth)")
        if self.kind == "rrm":
            if self.fixed_spectrum is None:
                raise ValueError(
                    "rrm requires fixed_spectrum (e.g. semicircle_spectrum(dim, sigma_w))"
                )
            spectrum = np.asarray(self.fixed_spectrum, dtype=float)
            if spectrum.shape != (self.dim,):
                raise ValueError(
                    f"fixed_spectrum length {spectrum.shape} != dim {self.dim}"
                )
            scale = max(1.0, float(np.max(np.abs(spectrum))))
            if abs(spectrum.mean()) > 1e-12 * scale:
                raise ValueError(
                    f"fixed_spectrum must be centered; mean = {spectrum.mean():.3e}"
                )
            sigma_d = float(np.sqrt(np.mean(spectrum**2)))
            # sigma_d == 0 (zero spectrum, hence W = 0) is allowed as the
            # degenerate deterministic ensemble
            if sigma_d > 0 and not np.isclose(sigma_d, self.sigma_w, rtol=1e-9, atol=0.0):
                raise ValueError(
                    f"spectrum std {sigma_d!r} does not match sigma_w {self.sigma_w!r}; "
                    "the spectrum variance is the macroscopic constraint"
                )
            object.__setattr__(self, "fixed_spectrum", spectrum)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "dim": self.dim,
            "sigma_w": self.sigma_w,
            "symmetry": self.symmetry,
            "normalization": self.normalization,
        }
        if self.band is not None:
            out["band"] = {"profile": self.band.profile, "bandwidth": self.band.bandwidth}
        if self.fixed_spectrum is not None:
            out["fixed_spectrum"] = [float(x) for x in self.fixed_spectrum]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleSpec":
        data = dict(data)
        band = data.pop("band", None)
        if band is not None:
            band = BandSpec(profile=band["profile"], bandwidth=int(band["bandwidth"]))
        spectrum = data.pop("fixed_spectrum", None)
        if isinstance(spectrum, str):
            if spectrum != "semicircle":
                raise ValueError(f"unknown named spectrum {spectrum!r}")
            spectrum = semicircle_spectrum(int(data["dim"]), float(data["sigma_w"]))
        elif spectrum is not None:
            spectrum = np.asarray(spectrum, dtype=float)
        return cls(
            kind=data["kind"],
            dim=int(data["dim"]),
            sigma_w=float(data["sigma_w"]),
            symmetry=data.get("symmetry", "complex-hermitian"),
            band=band,
            fixed_spectrum=spectrum,
            normalization=data.get("normalization", "exact"),
        )

    def with_dim(self, dim: int) -> "EnsembleSpec":
        """Same ensemble at another dimension (rrm regenerates its spectrum)."""
        if self.kind == "rrm":
            return replace(
                self, dim=dim, fixed_spectrum=semicircle_spectrum(dim, self.sigma_w)
            )
        return replace(self, dim=dim)


@dataclass(frozen=True)
class PoincareBounds:
    """Documented lower bounds on the Poincaré constant of an ensemble.

    ``common`` is the bound valid for every ensemble handled here,
    ``dim/(2 sigma²)``.  ``gaussian`` is the tighter product-Gaussian
    value ``dim/sigma_w²``, only exact (and only reported) for the
    complex-hermitian Gaussian families.  ``best`` is the sharpest
    reported value.
    """

    common: float
    gaussian: float | None = None

    @property
    def best(self) -> float:
        return self.common if self.gaussian is None else max(self.common, self.gaussian)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for (seed, stream).

    Identical pairs reproduce the identical sample sequence; distinct
    stream ids under one master seed give statistically independent
    streams (spawn keys of one ``SeedSequence``).
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    )


def _raw_wigner(dim: int, sigma_w: float, symmetry: str, rng: np.random.Generator) -> np.ndarray:
    """Un-normalized, un-centered Wigner draw (entry conventions above)."""
    if symmetry == "complex-hermitian":
        scale = sigma_w / np.sqrt(2.0 * dim)
        re = np.tril(rng.normal(scale=scale, size=(dim, dim)))
        im = np.tril(rng.normal(scale=scale, size=(dim, dim)), -1)
        w = re + 1j * im
        w = w + w.conj().T - np.diag(np.diag(re)).astype(complex)
    else:
        off = np.tril(rng.normal(scale=sigma_w / np.sqrt(dim), size=(dim, dim)), -1)
        diag = rng.normal(scale=sigma_w * np.sqrt(2.0 / dim), size=dim)
        w = (off + off.T + np.diag(diag)).astype(complex)
    return w


def _center_and_normalize(w: np.ndarray, spec: EnsembleSpec) -> np.ndarray:
    """Apply the traceless projection, then the requested normalization.

    Centering subtracts ``(Tr W / dim) I``; exact normalization then
    rescales the sample so ``Tr(W²)/dim = sigma_w²`` holds per sample,
    not just in expectation.
    """
    dim = spec.dim
    w = w - (np.trace(w).real / dim) * np.eye(dim)
    if spec.normalization == "exact":
        t2 = frobenius_norm_sq(w)
        if t2 == 0.0:
            raise ValueError(
                "exact normalization infeasible: the centered sample vanishes "
                f"(dim={dim}); a traceless matrix cannot have sigma_w={spec.sigma_w} > 0"
            )
        w = w * (spec.sigma_w * np.sqrt(dim / t2))
    return w


def sample_wigner(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one centered, normalized Wigner interaction matrix."""
    if spec.kind != "wigner":
        raise ValueError(f"spec.kind is {spec.kind!r}, expected 'wigner'")
    w = _raw_wigner(spec.dim, spec.sigma_w, spec.symmetry, rng)
    return _center_and_normalize(w, spec)


def band_mask(dim: int, band: BandSpec) -> np.ndarray:
    """Profile values ``a((i-j)/b)`` as a dim x dim array."""
    lags = np.subtract.outer(np.arange(dim), np.arange(dim))
    return BAND_PROFILES[band.profile](lags / band.bandwidth)


def sample_wbrm(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one banded Wigner matrix: profile-modulated entries.

    The underlying full Wigner matrix consumes the generator exactly as
    :func:`sample_wigner` does, so a profile that is identically 1
    reproduces the plain Wigner sample of the same (seed, stream).
    """
    if spec.kind != "wbrm":
        raise ValueError(f"spec.kind is {spec.kind!r}, expected 'wbrm'")
    assert spec.band is not None
    if spec.band.bandwidth >= spec.dim:
        logger.info(
            "wbrm bandwidth %d >= dim %d: band covers the whole matrix",
            spec.band.bandwidth,
            spec.dim,
        )
    w = _raw_wigner(spec.dim, spec.sigma_w, spec.symmetry, rng)
    w = w * band_mask(spec.dim, spec.band)
    return _center_and_normalize(w, spec)


def sample_haar_unitary(dim: int, symmetry: str, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (complex) or orthogonal (real) matrix.

    QR of a Ginibre matrix with the R-diagonal phase absorbed into Q,
    which makes the factorization unique and the law exactly Haar.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if symmetry == "complex-hermitian":
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    elif symmetry == "real-symmetric":
        z = rng.normal(size=(dim, dim))
    else:
        raise ValueError(f"unknown symmetry class {symmetry!r}")
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return np.asarray(q, dtype=complex)


def sample_rrm(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one randomly rotated matrix ``U D U†`` with fixed spectrum."""
    if spec.kind != "rrm":
        raise ValueError(f"spec.kind is {spec.kind!r}, expected 'rrm'")
    u = sample_haar_unitary(spec.dim, spec.symmetry, rng)
    w = (u * spec.fixed_spectrum) @ u.conj().T
    # rotation introduces ~1e-16 Hermiticity dust; remove it
    return hermitian_part(w)


_SAMPLERS = {"wigner": sample_wigner, "wbrm": sample_wbrm, "rrm": sample_rrm}


def sample(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one interaction matrix of the kind requested by ``spec``."""
    w = _SAMPLERS[spec.kind](spec, rng)
    return check_hermitian(w)


def semicircle_spectrum(dim: int, sigma: float) -> np.ndarray:
    """Deterministic semicircle-law quantile spectrum with exact variance.

    Level ``k`` is the ``(k+1/2)/dim`` quantile of the semicircle
    distribution, antisymmetrized so the mean is exactly zero, then
    rescaled so ``sum(x²)/dim = sigma²`` exactly.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not sigma > 0:
        raise ValueError("sigma must be > 0")

    def cdf(x):
        # semicircle on [-2, 2] (unit variance)
        return 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi

    probs = (np.arange(dim) + 0.5) / dim
    levels = np.array(
        [optimize.brentq(lambda x, p=p: cdf(x) - p, -2.0, 2.0, xtol=1e-14) for p in probs]
    )
    levels = 0.5 * (levels - levels[::-1])  # enforce exact antisymmetry
    rms = np.sqrt(np.mean(levels**2))
    if rms == 0.0:
        raise ValueError(f"dim={dim} gives a vanishing spectrum; cannot scale to sigma > 0")
    return levels * (sigma / rms)


def poincare_lower_bound(spec: EnsembleSpec) -> PoincareBounds:
    """Documented Poincaré-constant lower bounds for ``spec`` (see module docs)."""
    common = spec.dim / (2.0 * spec.sigma_w**2)
    if spec.kind in ("wigner", "wbrm") and spec.symmetry == "complex-hermitian":
        return PoincareBounds(common=common, gaussian=spec.dim / spec.sigma_w**2)
    return PoincareBounds(common=common)
