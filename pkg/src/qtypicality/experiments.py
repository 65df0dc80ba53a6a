"""Experiment run modes: compute, then emit CSV + JSON artifacts.

Artifacts are deterministic for a fixed (config, master_seed): floats
are written with 17 significant digits, realizations are merged in
stream order, and the only timestamps live in the manifest.
"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .concentration import (
    ensemble_statistics,
    gradient_report,
    poincare_mc_test,
    recommended_t_max,
    scaling_study,
    scaling_trend_report,
    stationary_window,
    stationary_window_stats,
)
from .config import ExperimentConfig, sanity_warnings
from .dynamics import (
    PhysicalityError,
    gaussian_dos_stationary_populations,
    run_trajectory,
)
from .ensembles import make_rng, sample
from .linalg import MAX_DENSE_DIM

logger = logging.getLogger(__name__)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    """RFC-4180-style CSV: header row, '.' decimal separator, UTF-8."""
    lines = [",".join(header)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_manifest(out: Path, config: ExperimentConfig, wall_time_s: float, extra: dict) -> None:
    import scipy

    payload = {
        "config": config.to_dict(),
        "config_sha256": config.sha256(),
        "versions": {
            "qtypicality": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": wall_time_s,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    payload.update(extra)
    write_json(out / "manifest.json", payload)


def trajectory_header(dim_s: int) -> list[str]:
    header = ["time"] + [f"p_{k}" for k in range(dim_s)]
    for i in range(dim_s):
        for j in range(i + 1, dim_s):
            header += [f"re_rho_{i}_{j}", f"im_rho_{i}_{j}"]
    return header + ["stream"]


def write_trajectory_csv(path: Path, traj) -> None:
    dim_s = traj.dim_s
    rows = []
    for k, t in enumerate(traj.times):
        row = [t] + [traj.populations[k, i] for i in range(dim_s)]
        for i in range(dim_s):
            for j in range(i + 1, dim_s):
                row += [traj.reduced[k, i, j].real, traj.reduced[k, i, j].imag]
        row.append(-1 if traj.stream is None else traj.stream)
        rows.append(row)
    write_csv(path, trajectory_header(dim_s), rows)


def _speckle_job(args):
    system, spec, psi0, times, master_seed, stream = args
    w = sample(spec, make_rng(master_seed, stream))
    try:
        return run_trajectory(system, w, psi0, times, stream=stream)
    except PhysicalityError as exc:
        raise PhysicalityError(f"realization stream {stream}: {exc}") from exc


def run_speckle(config: ExperimentConfig, out: Path) -> dict:
    """One trajectory CSV per realization plus stationary-window summary."""
    system, psi0, meta = config.system.build()
    jobs = [
        (system, config.ensemble, psi0, config.times, config.master_seed, stream)
        for stream in range(config.n_realizations)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            trajectories = list(pool.map(_speckle_job, jobs))
    else:
        trajectories = [_speckle_job(job) for job in jobs]
    trajectories.sort(key=lambda tr: tr.stream)

    window = stationary_window(float(config.times[-1]))
    summary_rows = []
    files = []
    for traj in trajectories:
        name = f"speckle_dim{system.dim_e}_r{traj.stream}.csv"
        write_trajectory_csv(out / name, traj)
        files.append(name)
        mean, std = stationary_window_stats(traj, window)
        summary_rows.append(
            {
                "stream": traj.stream,
                "window_mean": [float(x) for x in mean],
                "window_std": [float(x) for x in std],
            }
        )
    summary = {
        "system": meta,
        "window": list(window),
        "realizations": summary_rows,
        "files": files,
    }
    if system.dim_s == 2 and config.system.spectrum_s is None:
        p0, p1 = gaussian_dos_stationary_populations(
            config.system.gap, meta["epsilon_e_actual"], config.system.sigma_e
        )
        summary["stationary_prediction"] = {"p_0": p0, "p_1": p1}
    write_json(out / "summary.json", summary)
    return summary


def run_concentration(config: ExperimentConfig, out: Path) -> dict:
    """Fluctuation variance vs. its bound on the configured time grid."""
    system, psi0, meta = config.system.build()
    stats = ensemble_statistics(
        system,
        config.ensemble,
        psi0,
        config.times,
        n=config.n_realizations,
        master_seed=config.master_seed,
        workers=config.workers,
    )
    write_csv(
        out / "concentration.csv",
        ["time", "sigma_rho_sq", "variance_bound", "n"],
        [
            (t, s, b, stats.n)
            for t, s, b in zip(stats.times, stats.sigma_rho_sq, stats.variance_bound)
        ],
    )
    summary = {
        "system": meta,
        "n_realizations": stats.n,
        "bound_satisfied_everywhere": bool(not np.any(stats.violations)),
        "n_violations": int(np.sum(stats.violations)),
        "max_ratio_to_bound": float(
            np.max(
                np.divide(
                    stats.sigma_rho_sq,
                    stats.variance_bound,
                    out=np.zeros_like(stats.sigma_rho_sq),
                    where=stats.variance_bound > 0,
                )
            )
        ),
        "physicality": {
            **stats.diagnostics,
            "pass": bool(
                stats.diagnostics["max_trace_err"] <= 1e-10
                and stats.diagnostics["max_herm_err"] <= 1e-10
                and stats.diagnostics["min_eigval"] >= -1e-10
            ),
        },
    }
    write_json(out / "summary.json", summary)
    return summary


def run_scaling(config: ExperimentConfig, out: Path) -> dict:
    """Fluctuation variance at fixed t as dim_e grows, with speckle stds."""
    dims_e = [int(d) for d in config.extra["dims_e"]]
    t = float(config.extra["t"])
    window_points = int(config.extra.get("window_points", 50))
    t_max = recommended_t_max(config.ensemble.sigma_w)
    window = stationary_window(t_max)

    def make_system(dim_e):
        system, psi0, _ = config.system.build(dim_e=dim_e)
        return system, psi0

    base_dim_s = config.system.dim_s
    if any(d * base_dim_s > MAX_DENSE_DIM for d in dims_e):
        raise ValueError(f"dims_e {dims_e}: composite dimension exceeds {MAX_DENSE_DIM}")
    rows = scaling_study(
        make_system,
        config.ensemble,
        dims_e,
        t=t,
        n=config.n_realizations,
        master_seed=config.master_seed,
        workers=config.workers,
        window=window,
        window_points=window_points,
    )
    write_csv(
        out / "scaling.csv",
        ["dim_e", "t", "sigma_rho_sq", "variance_bound", "speckle_std_p0", "n"],
        [
            (r.dim_e, r.t, r.sigma_rho_sq, r.variance_bound, r.speckle_std_p0, r.n)
            for r in rows
        ],
    )
    trend = scaling_trend_report(rows)
    summary = {
        "t": t,
        "window": list(window),
        "rows": [
            {
                "dim_e": r.dim_e,
                "sigma_rho_sq": r.sigma_rho_sq,
                "variance_bound": r.variance_bound,
                "speckle_std_p0": r.speckle_std_p0,
            }
            for r in rows
        ],
        "trend": trend,
        "bound_satisfied_everywhere": bool(
            all(r.sigma_rho_sq <= r.variance_bound for r in rows)
        ),
    }
    write_json(out / "summary.json", summary)
    return summary


def run_gradient_check(config: ExperimentConfig, out: Path) -> dict:
    """Numeric vs. closed-form vs. uniform gradient bound at small dims."""
    dims_e = [int(d) for d in config.extra["dims_e"]]
    n_instances = int(config.extra.get("n_instances", 30))
    lo, hi = (float(x) for x in config.extra.get("tau_range", (0.1, 2.0)))
    step = config.extra.get("fd_step")
    rows = []
    chain_ok = True
    rng = make_rng(config.master_seed, 0)
    for k in range(n_instances):
        dim_e = dims_e[k % len(dims_e)]
        system, psi0, _ = config.system.build(dim_e=dim_e)
        spec = config.ensemble.with_dim(system.dim)
        w = sample(spec, make_rng(config.master_seed, k + 1))
        tau = float(rng.uniform(lo, hi))
        report = gradient_report(system, w, psi0, tau, step=step)
        ok = report.chain_holds()
        chain_ok = chain_ok and ok
        rows.append(
            (
                k,
                dim_e,
                tau,
                report.numeric_gradient_norm_sq,
                report.exact_commutator_norm_sq,
                report.analytic_upper_bound,
                ok,
            )
        )
    write_csv(
        out / "gradient_check.csv",
        ["instance", "dim_e", "tau", "numeric", "exact", "bound", "chain_ok"],
        rows,
    )
    summary = {
        "n_instances": n_instances,
        "dims_e": dims_e,
        "all_chains_hold": bool(chain_ok),
        "max_numeric_over_exact": float(max(r[3] / r[4] for r in rows)),
        "max_exact_over_bound": float(max(r[4] / r[5] for r in rows)),
    }
    write_json(out / "summary.json", summary)
    return summary


def run_poincare_check(config: ExperimentConfig, out: Path) -> dict:
    """Monte Carlo Poincaré-inequality margins for the registered functions."""
    functions = list(config.extra["functions"])
    dims = [int(d) for d in config.extra["dims"]]
    n_samples = int(config.extra.get("n_samples", 2000))
    rows = []
    all_ok = True
    for g in functions:
        for dim in dims:
            spec = config.ensemble.with_dim(dim)
            report = poincare_mc_test(spec, g, n_samples, config.master_seed)
            ok = report.margin <= 1.0 + 3.0 * report.margin_se
            all_ok = all_ok and ok
            rows.append(
                (g, dim, report.n, report.constant, report.variance,
                 report.grad_norm_sq_mean, report.margin, report.margin_se, ok)
            )
    population = config.extra.get("population")
    if population:
        system, psi0, _ = config.system.build(dim_e=int(population.get("dim_e", 8)))
        spec = config.ensemble.with_dim(system.dim)
        report = poincare_mc_test(
            spec,
            "population",
            int(population.get("n_samples", 500)),
            config.master_seed,
            system=system,
            psi0=psi0,
            tau=float(population.get("tau", 1.0)),
        )
        ok = report.margin <= 1.0 + 3.0 * report.margin_se
        all_ok = all_ok and ok
        rows.append(
            ("population", system.dim, report.n, report.constant, report.variance,
             report.grad_norm_sq_mean, report.margin, report.margin_se, ok)
        )
    write_csv(
        out / "poincare_check.csv",
        ["function", "dim", "n", "constant", "variance", "grad_norm_sq_mean",
         "margin", "margin_se", "within_tolerance"],
        rows,
    )
    summary = {"all_within_tolerance": bool(all_ok), "n_tests": len(rows)}
    write_json(out / "summary.json", summary)
    return summary


_RUNNERS = {
    "speckle": run_speckle,
    "concentration": run_concentration,
    "scaling": run_scaling,
    "gradient-check": run_gradient_check,
    "poincare-check": run_poincare_check,
}


def run_experiment(config: ExperimentConfig) -> dict:
    """Dispatch a validated config to its runner and write the manifest."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for warning in sanity_warnings(config):
        logger.warning("%s", warning)
    start = time.perf_counter()
    summary = _RUNNERS[config.mode](config, out)
    write_manifest(out, config, wall_time_s=time.perf_counter() - start, extra={})
    return summary
