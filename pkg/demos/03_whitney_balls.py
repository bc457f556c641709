"""Whitney decomposition of a union of two overlapping disks.

The open set is covered by dyadic squares whose side is comparable to
their distance from the complement: small squares hug the boundary,
large ones fill the middle.  The verifier re-checks disjointness, the
distance band, the bounded side ratio between touching squares, the
neighbor count, and the bounded overlap of the slightly dilated squares.
"""

import numpy as np

from rieszkit import OpenSetOracle, verify_whitney, whitney_decompose

oracle = OpenSetOracle.from_balls(
    centers=[[0.0, 0.0], [0.9, 0.2]],
    radii=[0.8, 0.6],
    resolution_floor=0.02,
)
dec = whitney_decompose(oracle)
sides = np.array([q.side for q in dec.cubes])
print(f"decomposed into {len(dec.cubes)} squares, "
      f"sides from {sides.min():.4f} to {sides.max():.4f}")

by_side = {}
for s in sides:
    by_side[s] = by_side.get(s, 0) + 1
for s in sorted(by_side, reverse=True):
    print(f"  side {s:.4f}: {by_side[s]:4d} squares")

ratio = dec.dist_upper / (np.sqrt(2.0) * sides)
print(f"distance / diameter across squares: min {ratio.min():.3f}, "
      f"max {ratio.max():.3f} (must sit in [1, 4])")

rep = verify_whitney(dec, oracle=oracle, num_points=1000, seed=0)
print(f"\nverification: passed = {rep.passed}")
print(f"  interior disjointness : {rep.disjoint_ok}")
print(f"  distance band         : {rep.distance_ok}")
print(f"  side ratio <= 4       : {rep.side_ratio_ok} (max {rep.max_side_ratio:.1f})")
print(f"  neighbors <= 144      : {rep.neighbor_ok} (max {rep.max_neighbors})")
print(f"  dilated overlap <= 144: {rep.overlap_ok} (max {rep.max_overlap})")
print(f"  note: {rep.note}")
