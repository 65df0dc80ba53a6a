#!/usr/bin/env python3
"""The gradient chain behind the concentration of the reduced state.

The reduced density matrix at time tau, viewed as a function of the
interaction matrix, has a squared gradient norm that is (i) measurable
by finite differences over every Hermitian direction, (ii) bounded by
the closed form 2 tau² (dim_s - purity) evaluated at the evolved state,
and (iii) uniformly below 2 tau² dim_s, independent of the environment
size.  That dimension-free bound is what lets a Poincaré inequality
squeeze the fluctuations by 1/dim_e.
"""

import numpy as np

from qtypicality import EnsembleSpec, gradient_report, make_rng, sample, two_level_system
from qtypicality.dynamics import nearest_level, product_state

SIGMA_W = 0.2
rng = np.random.default_rng(5)

print(f"{'dim_e':>5} | {'tau':>5} | {'finite diff':>12} | {'closed form':>12} | {'bound':>8}")
print("-" * 56)
for k in range(9):
    dim_e = (2, 4, 8)[k % 3]
    system = two_level_system(1.0, dim_e)
    psi0 = product_state(system, 1, nearest_level(system.spectrum_e, -1.27))
    spec = EnsembleSpec(kind="wigner", dim=system.dim, sigma_w=SIGMA_W)
    w = sample(spec, make_rng(99, k))
    tau = float(rng.uniform(0.1, 2.0))
    rep = gradient_report(system, w, psi0, tau)
    print(
        f"{dim_e:>5} | {tau:>5.2f} | {rep.numeric_gradient_norm_sq:>12.6f} | "
        f"{rep.exact_commutator_norm_sq:>12.6f} | {rep.analytic_upper_bound:>8.4f}"
    )
print()
print("finite difference <= closed form <= 2 tau² dim_s on every row;")
print("the bound never references the environment dimension.")
