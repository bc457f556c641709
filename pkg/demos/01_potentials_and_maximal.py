"""Potentials and maximal functions on a small planar measure.

Every quantity below is an exact finite sum: the potential is summed
over the atoms, and the maximal functions are maxima over the critical
radii (the distances from the query to each atom), where every value a
ball can take is attained.
"""

import numpy as np

from rieszkit import (
    Ball,
    OperatorParams,
    PointMassMeasure,
    ball_mass,
    distribution_function,
    fractional_maximal,
    hl_maximal,
    layer_cake_integral,
    lp_norm,
    riesz_potential_direct_many,
)

rng = np.random.default_rng(3)
points = rng.uniform(-1.0, 1.0, size=(40, 2))
masses = rng.uniform(0.2, 1.0, size=40)
mu = PointMassMeasure(points, masses)
params = OperatorParams(ambient_dim=2, growth_exp=2.0, alpha=1.0)
f = rng.normal(size=40)

print(f"measure: {mu.natoms} atoms in the plane, total mass {mu.total_mass:.4f}")
print(f"operator: N = {params.growth_exp}, alpha = {params.alpha}, "
      f"kernel exponent {params.kernel_exp}")

queries = np.array([[0.0, 0.0], [0.5, 0.5], [2.0, 0.0]])
vals = riesz_potential_direct_many(mu, f, params, queries)
for x, v in zip(queries, vals):
    print(f"  potential at {x}: {v: .6f}")

x = queries[0]
print(f"\nmaximal functions at {x}:")
print(f"  fractional: {fractional_maximal(mu, f, params, x):.6f}")
print(f"  averaging : {hl_maximal(mu, f, x):.6f}")

# The sup over radii is a max over atom distances; a coarse radius scan
# can only approach it from below.
d = np.sort(np.sqrt(np.sum((points - x) ** 2, axis=1)))
coarse = 0.0
for r in np.linspace(d[0], d[-1], 25):
    b = Ball((0.0, 0.0), r)
    m = ball_mass(mu, b)
    if m > 0.0:
        coarse = max(coarse, sum(masses[i] * abs(f[i])
                                 for i in range(40) if np.linalg.norm(points[i] - x) <= r) / m)
print(f"  25-radius scan of the average: {coarse:.6f} (never exceeds the max)")

# Distribution function and the layer-cake identity, both exact.
lams = np.array([0.0, 0.5, 1.0, 2.0])
curve = distribution_function(mu, f, lams)
print("\nsuperlevel masses mu({f > lam}):")
for lam, m in zip(curve.thresholds, curve.values):
    print(f"  lam = {lam:4.1f}: {m:.6f}")

for p in (1.0, 2.0, 3.0):
    plain = float(np.sum(masses * np.abs(f) ** p))
    cake = layer_cake_integral(mu, f, p)
    print(f"p = {p}: sum m|f|^p = {plain:.12f}, layer cake = {cake:.12f}, "
          f"norm = {lp_norm(mu, f, p):.6f}")
