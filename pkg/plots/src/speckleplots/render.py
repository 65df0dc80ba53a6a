"""Render SVG figures from simulation CSV artifacts.

Three figure kinds, all fed by the experiment driver's CSV files:

* ``speckle-overlay``   -- ground-state population traces overlaid on a
  shared time grid, with an optional dashed horizontal theory line;
* ``squeezing-stack``   -- the same traces vertically shifted per file,
  to show the fluctuation amplitude shrinking with environment size;
* ``variance-vs-dim``   -- log-log fluctuation variance and its bound
  against the environment dimension, with a 1/dim guide line.

Output is deterministic: SVG ids use a fixed hash salt and the date
metadata is disabled, so identical inputs give identical bytes.
"""

import logging
import warnings
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "speckleplots"
matplotlib.rcParams["svg.fonttype"] = "none"  # keep labels as text: diffable

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

logger = logging.getLogger(__name__)

KINDS = ("speckle-overlay", "squeezing-stack", "variance-vs-dim")


class InputError(ValueError):
    """Bad or inconsistent input CSVs."""


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Load a header + numeric-rows CSV into a column dict."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise InputError(f"{path}: {len(header)} header fields, {data.shape[1]} columns")
    return {name: data[:, k] for k, name in enumerate(header)}


def _require_columns(table: dict, needed: tuple[str, ...], path) -> None:
    missing = [c for c in needed if c not in table]
    if missing:
        raise InputError(f"{path}: missing column(s) {missing}; found {sorted(table)}")


def _load_traces(paths) -> list[tuple[str, dict]]:
    paths = [Path(p) for p in paths]
    if not paths:
        raise InputError("no input traces given")
    traces = []
    for p in paths:
        table = read_csv(p)
        _require_columns(table, ("time", "p_0"), p)
        traces.append((p.stem, table))
    first = traces[0][1]["time"]
    for stem, table in traces[1:]:
        if table["time"].shape != first.shape or not np.allclose(
            table["time"], first, rtol=0, atol=1e-12
        ):
            raise InputError(f"{stem}: time grid differs from {traces[0][0]}")
    return traces


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=100)
    return fig, ax


def _save(fig, out: str | Path) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def render_speckle_overlay(paths, out, theory_line: float | None = None) -> Path:
    """Overlay population traces; dashed horizontal line marks the prediction."""
    traces = _load_traces(paths)
    fig, ax = _new_axes()
    for stem, table in traces:
        ax.plot(table["time"], table["p_0"], lw=0.9, label=stem)
    if theory_line is not None:
        ax.axhline(theory_line, ls="--", color="black", lw=1.2,
                   label=f"stationary prediction {theory_line:g}")
    ax.set_xlabel("time")
    ax.set_ylabel("ground-state population")
    ax.legend(loc="lower right", fontsize=8)
    return _save(fig, out)


def render_squeezing_stack(paths, out, shift: float = 0.1,
                           theory_line: float | None = None) -> Path:
    """Stack traces with a vertical shift per file (first file on top)."""
    traces = _load_traces(paths)
    fig, ax = _new_axes()
    for k, (stem, table) in enumerate(traces):
        offset = (len(traces) - 1 - k) * shift
        ax.plot(table["time"], table["p_0"] + offset, lw=0.9, label=stem)
        if theory_line is not None:
            ax.axhline(theory_line + offset, ls="--", color="black", lw=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel(f"ground-state population (traces shifted by {shift:g})")
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, out)


def render_variance_vs_dim(paths, out) -> Path:
    """Log-log measured variance and bound vs. environment dimension."""
    paths = [Path(p) for p in paths]
    if not paths:
        raise InputError("no input tables given")
    dims, measured, bounds = [], [], []
    have_measured = True
    for p in paths:
        table = read_csv(p)
        _require_columns(table, ("dim_e", "variance_bound"), p)
        if "sigma_rho_sq" not in table:
            have_measured = False
        dims.append(table["dim_e"])
        bounds.append(table["variance_bound"])
        measured.append(table.get("sigma_rho_sq", np.full_like(table["dim_e"], np.nan)))
    dims = np.concatenate(dims)
    bounds = np.concatenate(bounds)
    measured = np.concatenate(measured)
    if np.unique(dims).size < 2:
        raise InputError(f"need at least 2 distinct dimensions, got {np.unique(dims)}")
    if np.unique(dims).size != dims.size:
        raise InputError("repeated equal dimensions in the inputs")
    order = np.argsort(dims)
    dims, bounds, measured = dims[order], bounds[order], measured[order]

    fig, ax = _new_axes()
    ax.loglog(dims, bounds, "s--", color="tab:red", label="variance bound")
    if have_measured:
        ax.loglog(dims, measured, "o-", color="tab:blue", label="measured variance")
        anchor = measured[0]
    else:
        warnings.warn("sigma_rho_sq column missing: rendering bound-only plot")
        logger.warning("variance-vs-dim: bound-only plot (no measured column)")
        anchor = bounds[0]
    ax.loglog(dims, anchor * dims[0] / dims, ":", color="gray", lw=1.0,
              label="1/dim guide")
    ax.set_xlabel("environment dimension")
    ax.set_ylabel("fluctuation variance")
    ax.legend(fontsize=8)
    return _save(fig, out)


def render(kind: str, paths, out, theory_line: float | None = None,
           shift: float = 0.1) -> Path:
    """Dispatch a figure kind; see ``KINDS``."""
    if kind == "speckle-overlay":
        return render_speckle_overlay(paths, out, theory_line=theory_line)
    if kind == "squeezing-stack":
        return render_squeezing_stack(paths, out, shift=shift, theory_line=theory_line)
    if kind == "variance-vs-dim":
        return render_variance_vs_dim(paths, out)
    raise InputError(f"unknown figure kind {kind!r}; available: {KINDS}")
