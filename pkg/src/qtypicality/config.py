"""Experiment configuration: a versioned JSON schema with field-level checks.

One config file fully determines an experiment (mode, physical system,
interaction ensemble, time grid, realization count, master seed), so a
run is reproducible from the file plus the package version.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .concentration import recommended_t_max
from .dynamics import (
    CompositeSystem,
    gaussian_environment_spectrum,
    nearest_level,
    product_state,
)
from .ensembles import EnsembleSpec
from .linalg import MAX_DENSE_DIM

SCHEMA_VERSION = 1

MODES = ("speckle", "concentration", "scaling", "gradient-check", "poincare-check")

BYTES_PER_COMPLEX = 16


class ConfigError(ValueError):
    """Invalid experiment configuration; carries field-level diagnostics."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def memory_estimate_bytes(dim: int) -> int:
    """Dense complex matrix footprint for a composite dimension."""
    return dim * dim * BYTES_PER_COMPLEX


@dataclass(frozen=True)
class SystemConfig:
    """Physical system parameters: spectra are derived, not stored."""

    dim_e: int
    sigma_e: float = 1.0
    gap: float | None = 1.0
    spectrum_s: tuple | None = None
    epsilon_e: float = -1.27
    initial_level: int = 1

    @property
    def dim_s(self) -> int:
        return 2 if self.spectrum_s is None else len(self.spectrum_s)

    @property
    def dim(self) -> int:
        return self.dim_s * self.dim_e

    def system_spectrum(self) -> np.ndarray:
        if self.spectrum_s is not None:
            return np.asarray(self.spectrum_s, dtype=float)
        return np.array([0.0, float(self.gap)])

    def build(self, dim_e: int | None = None) -> tuple[CompositeSystem, np.ndarray, dict]:
        """Composite system, initial product state, and resolved metadata."""
        dim_e = self.dim_e if dim_e is None else dim_e
        system = CompositeSystem(
            spectrum_s=self.system_spectrum(),
            spectrum_e=gaussian_environment_spectrum(dim_e, self.sigma_e),
        )
        e_level = nearest_level(system.spectrum_e, self.epsilon_e)
        psi0 = product_state(system, self.initial_level, e_level)
        meta = {
            "dim_s": system.dim_s,
            "dim_e": dim_e,
            "initial_level": self.initial_level,
            "environment_level": e_level,
            "epsilon_e_target": self.epsilon_e,
            "epsilon_e_actual": float(system.spectrum_e[e_level]),
        }
        return system, psi0, meta

    def to_dict(self) -> dict:
        out = {
            "dim_e": self.dim_e,
            "sigma_e": self.sigma_e,
            "epsilon_e": self.epsilon_e,
            "initial_level": self.initial_level,
        }
        if self.spectrum_s is not None:
            out["spectrum_s"] = list(self.spectrum_s)
        else:
            out["gap"] = self.gap
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; see ``MODES`` for the run kinds."""

    mode: str
    system: SystemConfig
    ensemble: EnsembleSpec
    times: np.ndarray
    n_realizations: int
    master_seed: int
    workers: int = 1
    out_dir: str = "out"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "system": self.system.to_dict(),
            "ensemble": self.ensemble.to_dict(),
            "times": {"points": [float(t) for t in self.times]},
            "n_realizations": self.n_realizations,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "out_dir": self.out_dir,
        }
        out.update(self.extra)
        return out

    def sha256(self) -> str:
        import hashlib

        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _parse_times(data: dict, sigma_w: float, errors: list) -> np.ndarray:
    times = data.get("times", {})
    if "points" in times:
        pts = np.asarray(times["points"], dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            errors.append("times.points: must be a non-empty list")
            return np.array([0.0])
        if np.any(pts < 0) or np.any(np.diff(pts) <= 0):
            errors.append("times.points: must be non-negative and strictly ascending")
        return pts
    t_max = float(times.get("t_max", recommended_t_max(sigma_w)))
    n_points = int(times.get("n_points", 400))
    if t_max <= 0:
        errors.append(f"times.t_max: must be > 0, got {t_max}")
        t_max = 1.0
    if n_points < 2:
        errors.append(f"times.n_points: must be >= 2, got {n_points}")
        n_points = 2
    return np.linspace(0.0, t_max, n_points)


_MODE_EXTRA_KEYS = {
    "speckle": (),
    "concentration": (),
    "scaling": ("dims_e", "t", "window_points"),
    "gradient-check": ("dims_e", "n_instances", "tau_range", "fd_step"),
    "poincare-check": ("functions", "dims", "n_samples", "population"),
}


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig`, accumulating diagnostics."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: expected {SCHEMA_VERSION}, got {version}")

    mode = data.get("mode")
    if mode not in MODES:
        errors.append(f"mode: expected one of {MODES}, got {mode!r}")
        mode = "speckle"

    sys_data = data.get("system", {})
    system = None
    try:
        system = SystemConfig(
            dim_e=int(sys_data["dim_e"]),
            sigma_e=float(sys_data.get("sigma_e", 1.0)),
            gap=(None if "spectrum_s" in sys_data else float(sys_data.get("gap", 1.0))),
            spectrum_s=(
                tuple(float(x) for x in sys_data["spectrum_s"])
                if "spectrum_s" in sys_data
                else None
            ),
            epsilon_e=float(sys_data.get("epsilon_e", -1.27)),
            initial_level=int(sys_data.get("initial_level", 1)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(f"system: {exc!r}")
    if system is not None:
        if system.dim_e < 1:
            errors.append(f"system.dim_e: must be >= 1, got {system.dim_e}")
        elif system.dim > MAX_DENSE_DIM:
            mib = memory_estimate_bytes(system.dim) / 2**20
            errors.append(
                f"system: composite dimension {system.dim} exceeds the dense cap "
                f"{MAX_DENSE_DIM} (one matrix would need {mib:.0f} MiB)"
            )
        if not 0 <= system.initial_level < system.dim_s:
            errors.append(
                f"system.initial_level: {system.initial_level} out of range "
                f"for dim_s {system.dim_s}"
            )

    ens_data = dict(data.get("ensemble", {}))
    ensemble = None
    if system is not None:
        ens_data.setdefault("dim", system.dim)
        try:
            ensemble = EnsembleSpec.from_dict(ens_data)
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"ensemble: {exc}")

    sigma_w = float(ens_data.get("sigma_w", 1.0) or 1.0)
    times = _parse_times(data, sigma_w, errors)

    n_realizations = int(data.get("n_realizations", 1))
    if n_realizations < 1:
        errors.append(f"n_realizations: must be >= 1, got {n_realizations}")
    if mode in ("concentration", "scaling") and n_realizations < 2:
        errors.append(
            f"n_realizations: variance estimation needs >= 2, got {n_realizations}"
        )

    workers = int(data.get("workers", 1))
    if workers < 1:
        errors.append(f"workers: must be >= 1, got {workers}")

    extra = {k: data[k] for k in _MODE_EXTRA_KEYS.get(mode, ()) if k in data}
    if mode == "scaling":
        dims = extra.get("dims_e")
        if not dims:
            errors.append("dims_e: required for scaling mode")
        elif any(d < 1 for d in dims) or any(
            b <= a for a, b in zip(dims, dims[1:])
        ):
            errors.append(f"dims_e: must be positive strictly ascending, got {dims}")
        if "t" not in extra:
            errors.append("t: required for scaling mode (fixed comparison time)")
    if mode == "gradient-check":
        if not extra.get("dims_e"):
            errors.append("dims_e: required for gradient-check mode")
        lo, hi = extra.get("tau_range", (0.1, 2.0))
        if not 0 <= lo < hi:
            errors.append(f"tau_range: need 0 <= lo < hi, got {(lo, hi)}")
    if mode == "poincare-check":
        if not extra.get("functions"):
            errors.append("functions: required for poincare-check mode")
        if not extra.get("dims"):
            errors.append("dims: required for poincare-check mode")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        mode=mode,
        system=system,
        ensemble=ensemble,
        times=times,
        n_realizations=n_realizations,
        master_seed=int(data.get("master_seed", 0)),
        workers=workers,
        out_dir=str(data.get("out_dir", "out")),
        extra=extra,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a JSON config file; parse failures keep line/column context."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"config file: {exc}"]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    return config_from_dict(data)


def sanity_warnings(config: ExperimentConfig) -> list[str]:
    """Non-fatal physics warnings for a validated config."""
    warnings = []
    system, _, _ = config.system.build()
    span = (system.spectrum_s.max() + system.spectrum_e.max()) - (
        system.spectrum_s.min() + system.spectrum_e.min()
    )
    if span > 0 and config.ensemble.sigma_w > 0.25 * span:
        warnings.append(
            f"sigma_w = {config.ensemble.sigma_w} is not small against the "
            f"bare spectral span {span:.3g}; perturbative intuition may fail"
        )
    mib = memory_estimate_bytes(system.dim) / 2**20
    if mib > 256:
        warnings.append(
            f"composite dimension {system.dim}: each dense matrix needs {mib:.0f} MiB"
        )
    return warnings
