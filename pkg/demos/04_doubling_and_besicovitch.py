"""Growth vs doubling on a skewed self-similar measure, plus coverings.

A measure can satisfy the growth bound mu(B(x,r)) <= C r^N on a scale
window while failing to be doubling: the skewed splitting below sends
the doubling ratio through the roof at the gap scales, which is exactly
what the windowed scans make visible.  Doubling-cube searches and the
bounded-overlap selection still work, since they need no doubling at all.
"""

import math

import numpy as np

from rieszkit import (
    CenteredCube,
    ScaleRange,
    besicovitch_select,
    cube_mass,
    doubling_constant_scan,
    find_big_doubling_cube,
    find_small_doubling_cube,
    gen_cantor_like,
    growth_constant_scan,
    OperatorParams,
)

mu = gen_cantor_like(levels=10, ratio=1.0 / 3.0, theta=0.8)
N = math.log(2.0) / math.log(3.0)
print(f"self-similar measure: {mu.natoms} atoms, growth exponent N = {N:.4f}")

scales = ScaleRange.for_measure(mu)
growth = growth_constant_scan(mu, OperatorParams(1, N, N / 2.0), scales)
doubling = doubling_constant_scan(mu, scales)
print(f"windowed growth constant  : {growth.constant:.3f} "
      f"(witness r = {growth.witness_radius:.2e})")
print(f"windowed doubling constant: {doubling.constant:.3f} "
      f"(witness r = {doubling.witness_radius:.2e})")
print("the doubling constant grows with depth; the growth constant does not\n")

# Shrink a cube until the measure doubles on it, keeping the audit
# trail.  Starting at a gap edge makes the first dilations jump across
# the gap onto heavy mass, so a couple of halvings are needed.
q0 = CenteredCube((0.34,), 0.34)
small = find_small_doubling_cube(mu, q0)
print(f"smallest doubling cube from side {q0.side}: side {small.cube.side:.6f} "
      f"after {small.halvings} halvings (beta = {small.beta:.3f})")
print(f"minimality re-certified from the trail: {small.certify_minimal()}")

big = find_big_doubling_cube(mu, x=(0.4,), min_side=2.0**-8)
m_in = cube_mass(mu, big.cube)
m_out = cube_mass(mu, big.cube, dilation=2.0)
print(f"growing instead: side {big.cube.side:.4f} after {big.doublings} doublings, "
      f"ratio {m_out / m_in:.3f} <= {big.beta:.3f}\n")

# Bounded-overlap selection from a crowded family of centered cubes.
rng = np.random.default_rng(5)
family = [CenteredCube(tuple(rng.uniform(0, 1, size=2)), float(rng.uniform(0.1, 0.5)))
          for _ in range(60)]
sel = besicovitch_select(family)
print(f"besicovitch: kept {len(sel.selected)} of {len(family)} cubes, "
      f"max overlap {sel.max_overlap} <= {sel.overlap_bound}, "
      f"all centers covered: {sel.all_centers_covered}")
