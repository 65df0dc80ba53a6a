"""Typicality of embedded quantum dynamics under random interactions.

A small system coupled to a large environment through a random
interaction matrix is propagated exactly; the package samples
interaction ensembles, extracts reduced density matrices, and verifies
the concentration-of-measure bounds that make the reduced dynamics
self-averaging.
"""

from .concentration import (
    EnsembleStatistics,
    FiniteDifferenceError,
    GradientReport,
    PoincareTestReport,
    ScalingRow,
    ensemble_statistics,
    exact_commutator_norm_sq,
    fluctuation_variance_bound,
    gradient_bound,
    gradient_report,
    hermitian_basis,
    numeric_gradient_norm_sq,
    poincare_mc_test,
    recommended_t_max,
    scaling_study,
    scaling_trend_report,
    stationary_window,
    stationary_window_stats,
)
from .dynamics import (
    CompositeSystem,
    PhysicalityError,
    Trajectory,
    build_h0,
    evolve_density,
    evolve_pure,
    gaussian_dos_stationary_populations,
    gaussian_environment_spectrum,
    nearest_level,
    product_state,
    reduce_pure,
    run_trajectory,
    two_level_system,
)
from .ensembles import (
    BandSpec,
    EnsembleSpec,
    PoincareBounds,
    make_rng,
    poincare_lower_bound,
    sample,
    sample_haar_unitary,
    sample_rrm,
    sample_wbrm,
    sample_wigner,
    semicircle_spectrum,
)
from .linalg import (
    Eigensystem,
    NonHermitianError,
    composite_index,
    eigh,
    frobenius_norm_sq,
    kron,
    partial_trace_env,
)

__version__ = "0.1.0"
