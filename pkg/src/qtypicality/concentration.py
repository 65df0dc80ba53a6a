"""Concentration checks for reduced density matrices over random interactions.

Quantifies three nested statements about the reduced state considered
as a function of the interaction matrix:

1. a gradient bound: the squared gradient norm of the reduced state is
   at most ``2 tau² dim_s``, uniformly in the interaction and in the
   environment dimension, with the exact intermediate value
   ``2 tau² (dim_s - Tr((gamma gamma†)²))`` available in closed form;
2. a Poincaré inequality for each interaction ensemble, tested by
   Monte Carlo on registered scalar functions;
3. the resulting fluctuation bound
   ``E[||rho_s - E[rho_s]||²] <= 4 sigma_w² t² / dim_e``.

Gradient convention: all gradients with respect to an interaction
matrix are taken in an orthonormal (Hilbert-Schmidt) basis of the
Hermitian matrices -- diagonal units, ``(E_ij+E_ji)/sqrt(2)`` and
``i(E_ij-E_ji)/sqrt(2)``.  For a complex-linear differential this sum
of squared Frobenius norms coincides with the sum over all elementary
matrix directions, which is the norm the closed-form value refers to.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    CompositeSystem,
    PhysicalityError,
    Trajectory,
    build_h0,
    evolve_pure,
    reduce_pure,
    run_trajectory,
    validate_reduced_states,
)
from .ensembles import EnsembleSpec, make_rng, poincare_lower_bound, sample
from .linalg import check_hermitian, frobenius_norm_sq

# Finite-difference enumeration over all Hermitian directions scales as
# dim²  eigendecompositions; past this cap use the closed form.
MAX_NUMERIC_GRADIENT_DIM = 24

GAMMA_NORMALIZATION_TOL = 1e-9

# Relative agreement required between the full-step and half-step
# central-difference estimates (truncation-error control).
RICHARDSON_RTOL = 1e-3


class FiniteDifferenceError(RuntimeError):
    """Central differences failed their step-halving consistency check."""


def gradient_bound(tau: float, dim_s: int) -> float:
    """Uniform upper bound ``2 tau² dim_s`` on the squared gradient norm."""
    return 2.0 * tau**2 * dim_s


def exact_commutator_norm_sq(gamma: np.ndarray, tau: float) -> float:
    """Closed-form squared norm of the commutator map bounding the gradient.

    For the evolved pure state with coefficient matrix ``gamma`` (so the
    reduced state is ``gamma gamma†``), the squared norm of
    ``A -> -i tau Tr_e [A, |psi><psi|]`` over an orthonormal direction
    basis is ``2 tau² (dim_s - Tr((gamma gamma†)²))``.  It always lies
    between ``2 tau² (dim_s - 1)`` and ``2 tau² (dim_s - 1/min(dims))``
    and never exceeds ``gradient_bound(tau, dim_s)``.
    """
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.ndim != 2:
        raise ValueError("gamma must be a 2-d coefficient matrix")
    norm = frobenius_norm_sq(gamma)
    if abs(norm - 1.0) > GAMMA_NORMALIZATION_TOL:
        raise ValueError(f"gamma is not normalized: Tr(gamma gamma†) = {norm!r}")
    rho = gamma @ gamma.conj().T
    return 2.0 * tau**2 * (gamma.shape[0] - frobenius_norm_sq(rho))


def hermitian_basis(dim: int, symmetry: str = "complex-hermitian") -> np.ndarray:
    """Orthonormal Hilbert-Schmidt basis of the (real-)symmetric matrices.

    Returns a stacked array of shape ``(n_directions, dim, dim)``:
    ``dim²`` directions for the full Hermitian space, ``dim(dim+1)/2``
    for the real-symmetric subspace.
    """
    mats = [np.zeros((dim, dim), dtype=complex) for _ in range(dim)]
    for i in range(dim):
        mats[i][i, i] = 1.0
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = inv_sqrt2
            m[j, i] = inv_sqrt2
            mats.append(m)
            if symmetry == "complex-hermitian":
                m = np.zeros((dim, dim), dtype=complex)
                m[i, j] = 1j * inv_sqrt2
                m[j, i] = -1j * inv_sqrt2
                mats.append(m)
    return np.stack(mats)


def _reduced_states_batch(
    hs: np.ndarray, psi0: np.ndarray, tau: float, dim_s: int, dim_e: int
) -> np.ndarray:
    """Reduced state at time ``tau`` for a stack of Hamiltonians."""
    w, v = np.linalg.eigh(hs)
    coeffs = np.einsum("mij,i->mj", v.conj(), psi0)
    psis = np.einsum("mij,mj->mi", v, np.exp(-1j * w * tau) * coeffs)
    gammas = psis.reshape(-1, dim_s, dim_e)
    return gammas @ np.conj(np.swapaxes(gammas, 1, 2))


def numeric_gradient_norm_sq(
    sys: CompositeSystem,
    w: np.ndarray,
    psi0: np.ndarray,
    tau: float,
    step: float | None = None,
    max_dim: int = MAX_NUMERIC_GRADIENT_DIM,
) -> float:
    """Finite-difference squared gradient norm of the reduced state.

    Central differences of ``rho_s(w + eps * direction)`` over the full
    orthonormal Hermitian direction basis, summing squared Frobenius
    norms of the per-direction derivatives.  The default step is
    ``1e-5`` times the sample's spectrum variance; the estimate is
    accepted only if halving the step changes it by less than
    ``RICHARDSON_RTOL`` relative.
    """
    w = check_hermitian(w)
    dim = sys.dim
    if w.shape[0] != dim:
        raise ValueError(f"interaction dim {w.shape[0]} != composite dim {dim}")
    if dim > max_dim:
        raise ValueError(
            f"finite-difference enumeration capped at dim {max_dim} (got {dim}); "
            "use exact_commutator_norm_sq instead"
        )
    if step is None:
        sigma = np.sqrt(frobenius_norm_sq(w) / dim)
        step = 1e-5 * (sigma if sigma > 0 else 1.0)
    basis = hermitian_basis(dim)
    h = build_h0(sys) + w

    def estimate(eps: float) -> float:
        stacked = np.concatenate([h + eps * basis, h - eps * basis])
        reduced = _reduced_states_batch(stacked, psi0, tau, sys.dim_s, sys.dim_e)
        n_dir = basis.shape[0]
        derivs = (reduced[:n_dir] - reduced[n_dir:]) / (2.0 * eps)
        return float(np.sum(np.abs(derivs) ** 2))

    full = estimate(step)
    half = estimate(step / 2.0)
    scale = max(abs(half), 1e-12 * (1.0 + gradient_bound(tau, sys.dim_s)))
    if abs(full - half) > RICHARDSON_RTOL * scale:
        raise FiniteDifferenceError(
            f"step-halving mismatch: {full!r} vs {half!r} at step {step:.2e}"
        )
    return half


@dataclass(frozen=True)
class GradientReport:
    """The three-link chain: numeric <= closed form <= uniform bound."""

    tau: float
    numeric_gradient_norm_sq: float
    exact_commutator_norm_sq: float
    analytic_upper_bound: float

    def chain_holds(self, rtol: float = 1e-4) -> bool:
        return (
            self.numeric_gradient_norm_sq
            <= self.exact_commutator_norm_sq * (1.0 + rtol)
            <= self.analytic_upper_bound * (1.0 + rtol)
        )


def gradient_report(
    sys: CompositeSystem,
    w: np.ndarray,
    psi0: np.ndarray,
    tau: float,
    step: float | None = None,
) -> GradientReport:
    """Evaluate the full gradient chain for one interaction realization.

    The closed form is evaluated at the coefficient matrix of the state
    evolved to ``tau`` under the same ``w``.
    """
    h = build_h0(sys) + check_hermitian(w)
    psi_tau = evolve_pure(h, psi0, np.array([tau]))[0]
    gamma, _ = reduce_pure(psi_tau, sys.dim_s, sys.dim_e)
    return GradientReport(
        tau=tau,
        numeric_gradient_norm_sq=numeric_gradient_norm_sq(sys, w, psi0, tau, step=step),
        exact_commutator_norm_sq=exact_commutator_norm_sq(gamma, tau),
        analytic_upper_bound=gradient_bound(tau, sys.dim_s),
    )


def fluctuation_variance_bound(
    sigma_w: float, times: np.ndarray, dim_e: int
) -> np.ndarray:
    """Upper bound ``4 sigma_w² t² / dim_e`` on the ensemble variance of rho_s."""
    times = np.asarray(times, dtype=float)
    return 4.0 * sigma_w**2 * times**2 / dim_e


def _realization_reduced(args) -> tuple[int, np.ndarray]:
    """Worker: reduced-state stack for one seeded realization."""
    sys, spec, psi0, times, master_seed, stream = args
    rng = make_rng(master_seed, stream)
    w = sample(spec, rng)
    try:
        traj = run_trajectory(sys, w, psi0, times, stream=stream)
    except PhysicalityError as exc:
        raise PhysicalityError(f"realization stream {stream}: {exc}") from exc
    return stream, traj.reduced


@dataclass(frozen=True)
class EnsembleStatistics:
    """Per-time fluctuation statistics across interaction realizations."""

    times: np.ndarray
    n: int
    mean_reduced: np.ndarray  # (n_times, dim_s, dim_s)
    sigma_rho_sq: np.ndarray  # (n_times,) unbiased E||rho - mean||²
    variance_bound: np.ndarray  # (n_times,)
    speckle_std: np.ndarray | None = None  # (dim_s,) if a window was given
    window: tuple[float, float] | None = None
    diagnostics: dict | None = None

    @property
    def violations(self) -> np.ndarray:
        """Per-time flags where the measured variance exceeds the bound.

        An absolute floor of 1e-24 keeps estimator dust (eigenbasis
        round trips leave ~1e-30 at t = 0, where the bound is exactly 0)
        from flagging spurious violations.
        """
        return self.sigma_rho_sq > self.variance_bound + 1e-24


def ensemble_statistics(
    sys: CompositeSystem,
    spec: EnsembleSpec,
    psi0: np.ndarray,
    times: np.ndarray,
    n: int,
    master_seed: int,
    workers: int = 1,
    window: tuple[float, float] | None = None,
) -> EnsembleStatistics:
    """Mean and fluctuation variance of the reduced state over ``n`` realizations.

    Realization ``k`` uses the generator ``make_rng(master_seed, k)``,
    so results are independent of scheduling; workers only parallelize.
    The variance estimator is the unbiased one (``n-1`` denominator)
    around the same-sample mean.
    """
    if n < 2:
        raise ValueError("variance estimation needs n >= 2 realizations")
    if spec.dim != sys.dim:
        raise ValueError(f"ensemble dim {spec.dim} != composite dim {sys.dim}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    jobs = [(sys, spec, psi0, times, master_seed, stream) for stream in range(n)]
    reduced_all = np.empty((n, times.size, sys.dim_s, sys.dim_s), dtype=complex)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for stream, reduced in pool.map(_realization_reduced, jobs):
                reduced_all[stream] = reduced
    else:
        for job in jobs:
            stream, reduced = _realization_reduced(job)
            reduced_all[stream] = reduced

    mean_reduced = reduced_all.mean(axis=0)
    deviations = reduced_all - mean_reduced[np.newaxis]
    sigma_rho_sq = np.sum(np.abs(deviations) ** 2, axis=(0, 2, 3)) / (n - 1)

    trace_err = float(np.max(np.abs(np.trace(mean_reduced, axis1=1, axis2=2) - 1.0)))
    if trace_err > 1e-9:
        raise PhysicalityError(f"mean reduced state trace error {trace_err:.3e}")

    speckle_std = None
    if window is not None:
        populations = np.real(np.einsum("rtss->rts", reduced_all))
        mask = (times >= window[0]) & (times <= window[1])
        if not np.any(mask):
            raise ValueError(f"window {window} contains no grid times")
        # per-realization time-std inside the window, averaged over realizations
        speckle_std = populations[:, mask, :].std(axis=1, ddof=0).mean(axis=0)

    diagnostics = validate_reduced_states(reduced_all.reshape(-1, sys.dim_s, sys.dim_s))
    return EnsembleStatistics(
        times=times,
        n=n,
        mean_reduced=mean_reduced,
        sigma_rho_sq=sigma_rho_sq,
        variance_bound=fluctuation_variance_bound(spec.sigma_w, times, sys.dim_e),
        speckle_std=speckle_std,
        window=window,
        diagnostics=diagnostics,
    )


def recommended_t_max(sigma_w: float, coupling_periods: float = 20.0) -> float:
    """Horizon long enough for the stationary regime: ``sigma_w * T >= periods``."""
    return coupling_periods / sigma_w


def stationary_window(t_max: float) -> tuple[float, float]:
    """Default stationary window: the second half of the run."""
    return (0.5 * t_max, t_max)


def stationary_window_stats(
    traj: Trajectory, window: tuple[float, float]
) -> tuple[np.ndarray, np.ndarray]:
    """Time-average and time-std of each population over a window."""
    t0, t1 = window
    if not (traj.times[0] <= t0 <= t1 <= traj.times[-1]):
        raise ValueError(f"window {window} outside trajectory range")
    mask = (traj.times >= t0) & (traj.times <= t1)
    if not np.any(mask):
        raise ValueError(f"window {window} contains no sample times")
    pops = traj.populations[mask]
    return pops.mean(axis=0), pops.std(axis=0, ddof=0)


@dataclass(frozen=True)
class ScalingRow:
    """Fluctuation statistics for one environment dimension."""

    dim_e: int
    t: float
    sigma_rho_sq: float
    variance_bound: float
    n: int
    speckle_std_p0: float | None = None


def scaling_study(
    make_system,
    spec_template: EnsembleSpec,
    dims_e: np.ndarray,
    t: float,
    n: int,
    master_seed: int,
    workers: int = 1,
    window: tuple[float, float] | None = None,
    window_points: int = 50,
) -> list[ScalingRow]:
    """Fluctuation variance at fixed ``t`` as the environment grows.

    ``make_system(dim_e)`` must return ``(CompositeSystem, psi0)``;
    the ensemble spec is re-dimensioned per row.  When a stationary
    ``window`` is given, the same realizations also sample a uniform
    grid inside it to estimate the speckle amplitude.
    """
    dims_e = np.asarray(dims_e, dtype=int)
    if dims_e.size < 1:
        raise ValueError("dims_e must contain at least one dimension")
    if np.any(np.diff(dims_e) <= 0):
        raise ValueError("dims_e must be strictly ascending")
    rows = []
    for dim_e in dims_e:
        system, psi0 = make_system(int(dim_e))
        spec = spec_template.with_dim(system.dim)
        times = np.array([t])
        if window is not None:
            times = np.unique(
                np.concatenate([times, np.linspace(window[0], window[1], window_points)])
            )
        stats = ensemble_statistics(
            system, spec, psi0, times, n, master_seed, workers=workers, window=window
        )
        at_t = int(np.argmin(np.abs(stats.times - t)))
        rows.append(
            ScalingRow(
                dim_e=int(dim_e),
                t=t,
                sigma_rho_sq=float(stats.sigma_rho_sq[at_t]),
                variance_bound=float(stats.variance_bound[at_t]),
                n=n,
                speckle_std_p0=(
                    None if stats.speckle_std is None else float(stats.speckle_std[0])
                ),
            )
        )
    return rows


def scaling_trend_report(rows: list[ScalingRow], ratio_band: tuple[float, float] = (2.0, 8.0)) -> dict:
    """Check the inverse-dimension squeezing trend on a scaling table.

    Consecutive variances must decrease up to the statistical slack of
    an ``n``-sample variance estimate; for every pair of rows whose
    dimensions differ by exactly 4x, the variance ratio is compared to
    the given acceptance band around the ideal factor 4.
    """
    if len(rows) == 1:
        return {"monotone_ok": True, "ratios": [], "ratio_band": ratio_band, "band_ok": True}
    slack = 3.0 * np.sqrt(2.0 / (rows[0].n - 1))
    monotone_ok = all(
        rows[k + 1].sigma_rho_sq < rows[k].sigma_rho_sq * (1.0 + slack)
        for k in range(len(rows) - 1)
    )
    by_dim = {row.dim_e: row for row in rows}
    ratios = []
    for row in rows:
        if row.dim_e * 4 in by_dim:
            ratios.append(
                {
                    "dim_e": row.dim_e,
                    "dim_e_4x": row.dim_e * 4,
                    "ratio": row.sigma_rho_sq / by_dim[row.dim_e * 4].sigma_rho_sq,
                }
            )
    band_ok = all(ratio_band[0] <= r["ratio"] <= ratio_band[1] for r in ratios)
    return {
        "monotone_ok": monotone_ok,
        "ratios": ratios,
        "ratio_band": ratio_band,
        "band_ok": band_ok,
    }


# ---------------------------------------------------------------------------
# Poincaré inequality Monte Carlo


def default_linear_observable(dim: int, symmetry: str = "complex-hermitian") -> np.ndarray:
    """Fixed zero-diagonal Hermitian observable for the linear test function.

    Zero diagonal keeps the observable inside the maximal-variance
    coordinate subspace of the entry conventions used here, which is
    where the product-Gaussian Poincaré inequality is saturated.
    """
    rng = np.random.default_rng(1859)  # fixed: the observable is part of the test
    a = rng.normal(size=(dim, dim))
    if symmetry == "complex-hermitian":
        a = a + 1j * rng.normal(size=(dim, dim))
    a = a + a.conj().T
    np.fill_diagonal(a, 0.0)
    return a / np.sqrt(frobenius_norm_sq(a))


@dataclass(frozen=True)
class PoincareTestReport:
    """Monte Carlo verdict on ``variance <= E[||grad||²] / C`` for one function."""

    function_id: str
    n: int
    constant: float
    variance: float
    grad_norm_sq_mean: float
    margin: float
    margin_se: float


def _variance_se(values: np.ndarray) -> float:
    """Standard error of the unbiased sample variance (moment estimate)."""
    n = values.size
    centered = values - values.mean()
    m4 = float(np.mean(centered**4))
    s2 = float(np.var(values, ddof=1))
    var_of_var = (m4 - s2**2 * (n - 3) / (n - 1)) / n
    return float(np.sqrt(max(var_of_var, 0.0)))


POINCARE_FUNCTIONS = ("constant", "linear", "quadratic", "population")


def poincare_mc_test(
    spec: EnsembleSpec,
    g: str,
    n: int,
    master_seed: int,
    system: CompositeSystem | None = None,
    psi0: np.ndarray | None = None,
    tau: float | None = None,
    observable: np.ndarray | None = None,
    step: float | None = None,
) -> PoincareTestReport:
    """Empirical Poincaré-inequality margin for a registered test function.

    Registered functions of the sampled interaction ``W``:

    * ``constant``    -- ``g = 1`` (margin defined as 0);
    * ``linear``      -- ``g = Re Tr(A W)`` for a fixed Hermitian ``A``
      (analytic gradient: ``||A||_F²``);
    * ``quadratic``   -- ``g = Tr(W²)/dim`` (analytic gradient);
    * ``population``  -- ``g = p0(tau)`` of the embedded system
      (finite-difference gradient; needs ``system``, ``psi0``, ``tau``).

    The reported margin is ``variance * C / E[||grad||²]`` with ``C``
    the sharpest documented lower bound for the ensemble; values at or
    below 1 (within Monte Carlo error) verify the inequality.  Requires
    expectation-mode normalization: exact per-sample rescaling would
    condition the measure and break the product structure the
    inequality is stated for.
    """
    if g not in POINCARE_FUNCTIONS:
        raise ValueError(f"unknown test function {g!r}; registered: {POINCARE_FUNCTIONS}")
    if spec.normalization != "expectation":
        raise ValueError(
            "Poincaré Monte Carlo requires normalization='expectation' "
            f"(got {spec.normalization!r})"
        )
    if n < 2:
        raise ValueError("need n >= 2 samples")
    constant = poincare_lower_bound(spec).best

    if g == "constant":
        return PoincareTestReport(
            function_id=g, n=n, constant=constant, variance=0.0,
            grad_norm_sq_mean=0.0, margin=0.0, margin_se=0.0,
        )

    if g == "population":
        if system is None or psi0 is None or tau is None:
            raise ValueError("population test needs system, psi0 and tau")
        if system.dim != spec.dim:
            raise ValueError(f"system dim {system.dim} != ensemble dim {spec.dim}")
        if system.dim > MAX_NUMERIC_GRADIENT_DIM:
            raise ValueError(
                f"population test enumerates dim² directions; capped at "
                f"dim {MAX_NUMERIC_GRADIENT_DIM}"
            )
        basis = hermitian_basis(spec.dim, spec.symmetry)
        h0 = build_h0(system)
    elif g == "linear":
        if observable is None:
            observable = default_linear_observable(spec.dim, spec.symmetry)
        observable = check_hermitian(observable)
        if spec.symmetry == "real-symmetric" and np.max(np.abs(observable.imag)) > 1e-12:
            raise ValueError("real-symmetric ensembles need a real observable")
        grad_norm_sq_const = frobenius_norm_sq(observable)

    values = np.empty(n)
    grads = np.empty(n)
    for k in range(n):
        rng = make_rng(master_seed, k)
        w = sample(spec, rng)
        if g == "linear":
            values[k] = float(np.trace(observable @ w).real)
            grads[k] = grad_norm_sq_const
        elif g == "quadratic":
            values[k] = frobenius_norm_sq(w) / spec.dim
            grads[k] = 4.0 * frobenius_norm_sq(w) / spec.dim**2
        else:  # population
            eps = step if step is not None else 1e-5 * spec.sigma_w
            h = h0 + w
            p0 = _reduced_states_batch(
                h[np.newaxis], psi0, tau, system.dim_s, system.dim_e
            )[0, 0, 0].real
            values[k] = p0
            stacked = np.concatenate([h + eps * basis, h - eps * basis])
            reduced = _reduced_states_batch(stacked, psi0, tau, system.dim_s, system.dim_e)
            n_dir = basis.shape[0]
            dp0 = (reduced[:n_dir, 0, 0].real - reduced[n_dir:, 0, 0].real) / (2 * eps)
            grads[k] = float(np.sum(dp0**2))

    variance = float(np.var(values, ddof=1))
    grad_mean = float(np.mean(grads))
    if grad_mean == 0.0:
        margin, margin_se = 0.0, 0.0
    else:
        margin = variance * constant / grad_mean
        rel_var = (_variance_se(values) / variance) ** 2 if variance > 0 else 0.0
        rel_grad = float(np.var(grads, ddof=1)) / (n * grad_mean**2)
        margin_se = margin * float(np.sqrt(rel_var + rel_grad))
    return PoincareTestReport(
        function_id=g, n=n, constant=constant, variance=variance,
        grad_norm_sq_mean=grad_mean, margin=margin, margin_se=margin_se,
    )
