"""Distribution-inequality scans on a one-dimensional grid measure.

Three related scans over a (lambda, eps) grid, all comparing superlevel
masses of the potential against the fractional maximal function:

  conditional  mu({I > k·lam, M <= eps·lam})          vs eps^shape · mu({I > lam})
  two-term     mu({I > k·lam})                        vs b · eps^shape · mu({I > lam}) + mu({M > eps·lam})
  weighted     same two-term shape with masses w·dmu, quantified per eta

The empirical constants are suprema over the finite grid, so they are
lower bounds for the true constants.
"""

import numpy as np

from rieszkit import (
    OperatorParams,
    gen_lebesgue_grid,
    potential_and_maximal,
    verify_conditional,
    verify_two_term,
    verify_weighted,
)

mu = gen_lebesgue_grid((0.0, 1.0), 2.0**-10)
f = (mu.points[:, 0] <= 0.5).astype(float)
params = OperatorParams(1, 1.0, 0.5)
print(f"grid measure: {mu.natoms} atoms, f = indicator of [0, 1/2], "
      f"N = 1, alpha = 1/2, shape exponent {params.shape_exp}")

iaf, maf = potential_and_maximal(mu, f, params)
print(f"potential range  [{iaf.min():.4f}, {iaf.max():.4f}]")
print(f"maximal range    [{maf.min():.4f}, {maf.max():.4f}]\n")

cond = verify_conditional(mu, f, params, iaf=iaf, maf=maf)
print(f"conditional: C_emp = {cond.C_emp:.6f} over "
      f"{cond.lambda_grid.size} x {cond.eps_grid.size} cells, "
      f"violations = {cond.violations}")
print(f"  eps-decay exponent fit: {cond.exponent_fit} "
      f"(the conditional mass dies entirely below a finite eps)")

two = verify_two_term(mu, f, params, iaf=iaf, maf=maf)
print(f"two-term: minimal coefficient b_emp = {two.C_emp:.6f}")

w = 1.0 + np.abs(mu.points[:, 0])
wrep = verify_weighted(mu, f, w, params, etas=(0.5, 0.1), iaf=iaf, maf=maf)
print("weighted (w = 1 + |x|), largest eps making every row hold:")
for eta, eps, idx in wrep.eta_results:
    print(f"  eta = {eta}: eps = {eps} (grid index {idx})")
