"""Whitney decompositions, doubling-cube searches, bounded-overlap selection.

The open set is known only through a membership oracle, so complement
distances cannot be computed in closed form.  The decomposition instead
fixes a finite "complement cloud": points certified to lie outside the
set (found by refining mixed cells and bisecting inside/outside pairs),
together with the region beyond the oracle's bounding box.  The cube
selection criterion uses the exact Euclidean distance to that fixed
closed set.  Because the selection distance really is a distance to a
fixed set, the classical Whitney lattice facts (disjointness, size vs
distance band, bounded side ratios of touching cubes, bounded neighbor
and overlap counts) hold for the output up to float rounding.

Fidelity to the true open set is one-sided: cloud points are genuinely
outside, so the reported distance never underestimates how far a cube
is from the true complement; it can overestimate by at most the cloud's
covering spacing near the boundary, which is recorded on the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .measure import (
    CenteredCube,
    DyadicCube,
    PointMassMeasure,
    cube_mass,
)

__all__ = [
    "OpenSetOracle",
    "WhitneyDecomposition",
    "WhitneyCheckReport",
    "whitney_decompose",
    "verify_whitney",
    "DoublingSearchConfig",
    "SmallDoublingResult",
    "BigDoublingResult",
    "find_small_doubling_cube",
    "find_big_doubling_cube",
    "BesicovitchSelection",
    "besicovitch_select",
    "OracleInconsistencyError",
    "DoublingCubeNotFound",
    "BesicovitchOverlapError",
]

_MAX_LEVEL = 40


class OracleInconsistencyError(RuntimeError):
    """A point changed its membership answer between queries."""


class DoublingCubeNotFound(RuntimeError):
    """No doubling cube found within the halving budget."""

    def __init__(self, message: str, trail: list) -> None:
        super().__init__(message)
        self.trail = trail


class BesicovitchOverlapError(RuntimeError):
    """Selected cubes overlap too much, or a candidate center is uncovered."""

    def __init__(self, witness, count: int, bound: int, kind: str = "overlap") -> None:
        if kind == "overlap":
            msg = f"overlap {count} exceeds bound {bound} at point {np.asarray(witness)}"
        else:
            msg = f"candidate center {np.asarray(witness)} left uncovered"
        super().__init__(msg)
        self.witness = np.asarray(witness, dtype=float)
        self.count = count
        self.bound = bound
        self.kind = kind


# ---------------------------------------------------------------------------
# membership oracle
# ---------------------------------------------------------------------------


class OpenSetOracle:
    """Vectorized membership test for a bounded open set.

    contains_fn maps an (k, n) array of points to a boolean (k,) array.
    bounding_box is a CenteredCube guaranteed to contain the set, and
    resolution_floor is the smallest cube side the decomposition will
    consider.  A certified disjointness test (box provably misses the
    set) is optional; without it the descent cannot prune empty regions
    and simply walks them down to the floor.
    """

    def __init__(
        self,
        contains_fn: Callable[[np.ndarray], np.ndarray],
        bounding_box: CenteredCube,
        resolution_floor: float,
        disjoint_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
        name: str = "predicate",
    ) -> None:
        if not (resolution_floor > 0.0 and math.isfinite(resolution_floor)):
            raise ValueError("resolution_floor must be a positive finite real")
        if resolution_floor >= bounding_box.side:
            raise ValueError("resolution_floor must be smaller than the bounding box side")
        depth = math.log2(bounding_box.side / resolution_floor)
        if depth > _MAX_LEVEL:
            raise ValueError(
                f"resolution_floor is {depth:.1f} halvings below the box side; "
                f"at most {_MAX_LEVEL} are supported"
            )
        self._fn = contains_fn
        self.bounding_box = bounding_box
        self.resolution_floor = float(resolution_floor)
        self._disjoint_fn = disjoint_fn
        self.name = name
        self.ambient_dim = bounding_box.dim

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        out = np.asarray(self._fn(pts), dtype=bool)
        if out.shape != (pts.shape[0],):
            raise ValueError("membership function returned a wrong-shaped result")
        return out

    def certified_disjoint(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """True entries mark boxes provably disjoint from the set."""
        if self._disjoint_fn is None:
            return np.zeros(lo.shape[0], dtype=bool)
        return np.asarray(self._disjoint_fn(lo, hi), dtype=bool)

    def check_consistency(self, points: np.ndarray) -> None:
        first = self.contains(points)
        second = self.contains(points)
        if not np.array_equal(first, second):
            bad = int(np.argmax(first != second))
            raise OracleInconsistencyError(
                f"membership of point {points[bad]} flipped between queries"
            )

    @classmethod
    def from_balls(
        cls,
        centers,
        radii,
        resolution_floor: float | None = None,
        pad: float = 0.25,
    ) -> "OpenSetOracle":
        """Union of open Euclidean balls."""
        c = np.asarray(centers, dtype=float)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        r = np.asarray(radii, dtype=float).reshape(-1)
        if c.shape[0] != r.size or c.shape[0] == 0:
            raise ValueError("need one radius per center and at least one ball")
        if np.any(r <= 0.0) or not np.all(np.isfinite(r)) or not np.all(np.isfinite(c)):
            raise ValueError("ball centers must be finite and radii positive")
        lo = np.min(c - r[:, None], axis=0)
        hi = np.max(c + r[:, None], axis=0)
        side = float(np.max(hi - lo)) * (1.0 + 2.0 * pad)
        box = CenteredCube((lo + hi) / 2.0, side)
        floor = side * 2.0**-9 if resolution_floor is None else resolution_floor

        def member(pts: np.ndarray) -> np.ndarray:
            inside = np.zeros(pts.shape[0], dtype=bool)
            for i in range(r.size):
                d2 = np.sum((pts - c[i]) ** 2, axis=1)
                inside |= d2 < r[i] * r[i]
            return inside

        def disjoint(blo: np.ndarray, bhi: np.ndarray) -> np.ndarray:
            hit = np.zeros(blo.shape[0], dtype=bool)
            for i in range(r.size):
                g = np.maximum(blo - c[i], 0.0) + np.maximum(c[i] - bhi, 0.0)
                hit |= np.sum(g * g, axis=1) < r[i] * r[i]
            return ~hit

        return cls(member, box, floor, disjoint_fn=disjoint, name=f"{r.size}-ball union")

    @classmethod
    def from_predicate(
        cls,
        contains_fn: Callable[[np.ndarray], np.ndarray],
        bounding_box: CenteredCube,
        resolution_floor: float,
        name: str = "predicate",
    ) -> "OpenSetOracle":
        return cls(contains_fn, bounding_box, resolution_floor, name=name)


# ---------------------------------------------------------------------------
# complement cloud
# ---------------------------------------------------------------------------


def _cell_sample_offsets(n: int) -> np.ndarray:
    """Unit-cell sample lattice: corners, center, face midpoints."""
    corners = np.array(list(np.ndindex((2,) * n)), dtype=float)
    center = np.full((1, n), 0.5)
    faces = []
    for a in range(n):
        for v in (0.0, 1.0):
            m = np.full(n, 0.5)
            m[a] = v
            faces.append(m)
    return np.concatenate([corners, center, np.array(faces)])


@dataclass
class _Cloud:
    points: np.ndarray  # (k, n) certified complement points, possibly empty
    tree: cKDTree | None
    spacing: float  # refinement cell side near the boundary
    any_inside: bool


def _build_complement_cloud(
    oracle: OpenSetOracle, extra_depth: int, base_depth: int
) -> _Cloud:
    box = oracle.bounding_box
    n = oracle.ambient_dim
    root_lo = np.asarray(box.center) - box.side / 2.0
    side0 = box.side
    offsets = _cell_sample_offsets(n)

    floor_depth = int(math.floor(math.log2(side0 / oracle.resolution_floor) + 1e-9))
    target_depth = min(floor_depth + extra_depth, _MAX_LEVEL)
    base_depth = min(base_depth, target_depth)

    idx = np.array(list(np.ndindex((2**base_depth,) * n)), dtype=np.int64)
    depth = base_depth
    out_points: list[np.ndarray] = []
    any_inside = False
    pair_in: list[np.ndarray] = []
    pair_out: list[np.ndarray] = []

    while True:
        h = side0 / float(2**depth)
        cells = idx.shape[0]
        pts = root_lo + (idx[:, None, :] + offsets[None, :, :]) * h
        flat = pts.reshape(-1, n)
        member = oracle.contains(flat).reshape(cells, -1)
        n_in = np.sum(member, axis=1)
        all_in = n_in == member.shape[1]
        all_out = n_in == 0
        mixed = ~(all_in | all_out)
        any_inside = any_inside or bool(np.any(n_in > 0))

        if np.any(all_out):
            out_points.append(pts[all_out].reshape(-1, n))

        if depth >= target_depth:
            if np.any(mixed):
                mpts = pts[mixed]
                mmem = member[mixed]
                iin = np.argmax(mmem, axis=1)
                iout = np.argmax(~mmem, axis=1)
                rows = np.arange(mpts.shape[0])
                pair_in.append(mpts[rows, iin])
                pair_out.append(mpts[rows, iout])
                out_points.append(mpts[~mmem])
            break

        if not np.any(mixed):
            break
        childbits = np.array(list(np.ndindex((2,) * n)), dtype=np.int64)
        idx = (2 * idx[mixed])[:, None, :] + childbits[None, :, :]
        idx = idx.reshape(-1, n)
        depth += 1

    if pair_in:
        a = np.concatenate(pair_in)
        b = np.concatenate(pair_out)
        width = side0 / float(2**target_depth) * math.sqrt(n)
        tol = oracle.resolution_floor * 1e-6
        steps = max(1, math.ceil(math.log2(max(width / tol, 2.0))))
        for _ in range(steps):
            mid = (a + b) / 2.0
            inside = oracle.contains(mid)
            a = np.where(inside[:, None], mid, a)
            b = np.where(inside[:, None], b, mid)
        out_points.append(b)

    if out_points:
        pts = np.unique(np.concatenate(out_points), axis=0)
    else:
        pts = np.empty((0, n))
    tree = cKDTree(pts) if pts.shape[0] else None
    return _Cloud(pts, tree, side0 / float(2**target_depth), any_inside)


def _box_exterior_margin(lo: np.ndarray, hi: np.ndarray, box: CenteredCube) -> np.ndarray:
    """Distance from boxes [lo, hi] to the region outside the bounding box."""
    blo = np.asarray(box.center) - box.side / 2.0
    bhi = np.asarray(box.center) + box.side / 2.0
    margins = np.minimum(lo - blo[None, :], bhi[None, :] - hi)
    return np.maximum(np.min(margins, axis=1), 0.0)


def _box_cloud_distance(
    lo: np.ndarray, hi: np.ndarray, cloud: _Cloud, box: CenteredCube
) -> np.ndarray:
    """Exact distance from each box to cloud-union-exterior."""
    d = _box_exterior_margin(lo, hi, box)
    if cloud.tree is None:
        return d
    centers = (lo + hi) / 2.0
    half_diam = np.sqrt(np.sum((hi - lo) ** 2, axis=1)) / 2.0
    dc, _ = cloud.tree.query(centers)
    radii = np.minimum(dc + half_diam, d + half_diam) * (1.0 + 1e-9)
    hits = cloud.tree.query_ball_point(centers, radii)
    for i, cand in enumerate(hits):
        if not cand:
            continue
        p = cloud.points[cand]
        g = np.maximum(lo[i] - p, 0.0) + np.maximum(p - hi[i], 0.0)
        d[i] = min(d[i], math.sqrt(float(np.min(np.sum(g * g, axis=1)))))
    return d


# ---------------------------------------------------------------------------
# Whitney decomposition
# ---------------------------------------------------------------------------


@dataclass
class WhitneyDecomposition:
    """Selected dyadic cubes with their complement-distance brackets.

    dist_upper is the exact distance to the recorded complement points
    and is therefore a true upper bound on the distance to the real
    complement.  dist_lower subtracts the cloud covering slack; it is a
    sound lower bound provided every nearby boundary point is within
    one refinement cell of a recorded cloud point (a sampling
    assumption, stated in note).
    """

    cubes: list
    dist_lower: np.ndarray
    dist_upper: np.ndarray
    dilation_delta: float
    resolution_floor: float
    uncovered_mass_bound: float
    cloud_size: int
    cloud_spacing: float
    note: str = ""

    def __len__(self) -> int:
        return len(self.cubes)

    def union_contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        hit = np.zeros(pts.shape[0], dtype=bool)
        for q in self.cubes:
            hit |= q.contains(pts)
        return hit

    def total_volume(self) -> float:
        return float(sum(q.side ** q.dim for q in self.cubes))

    def to_csv(self, path) -> None:
        n = self.cubes[0].dim if self.cubes else 0
        cols = ["level"] + [f"index_{a+1}" for a in range(n)] + [
            "side",
            "dist_lower",
            "dist_upper",
        ]
        lines = [",".join(cols)]
        for q, dl, du in zip(self.cubes, self.dist_lower, self.dist_upper):
            row = [str(q.level)] + [str(int(i)) for i in q.index]
            row += [repr(q.side), repr(float(dl)), repr(float(du))]
            lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def whitney_decompose(
    oracle: OpenSetOracle,
    dilation_delta: float = 0.125,
    base_depth: int | None = None,
    cloud_extra_depth: int = 2,
) -> WhitneyDecomposition:
    """Cover the oracle's open set by dyadic cubes sized like their
    distance to the complement.

    Descends the dyadic tree from the bounding box.  A cube is selected
    when its full sample lattice lies inside the set, diam(Q) <= D(Q) <=
    4 diam(Q) for the recorded complement distance D, and no ancestor
    was selected.  Unselected cubes are split until their children would
    drop below the resolution floor; the residue volume at the floor is
    returned, never silently dropped.
    """
    if not (0.0 < dilation_delta < 0.25):
        raise ValueError("dilation_delta must lie in (0, 1/4)")
    n = oracle.ambient_dim
    box = oracle.bounding_box
    if base_depth is None:
        base_depth = 6 if n <= 2 else 4
    cloud = _build_complement_cloud(oracle, cloud_extra_depth, base_depth)
    slack = cloud.spacing * math.sqrt(n)
    note = (
        f"set={oracle.name}; complement cloud of {cloud.points.shape[0]} points, "
        f"refinement spacing {cloud.spacing:.3g}; dist_upper exact to the cloud, "
        f"dist_lower assumes boundary covering radius <= {slack:.3g}"
    )

    empty = WhitneyDecomposition(
        [], np.empty(0), np.empty(0), dilation_delta, oracle.resolution_floor,
        0.0, cloud.points.shape[0], cloud.spacing, note,
    )
    if not cloud.any_inside:
        return empty

    side0 = box.side
    root_lo = np.asarray(box.center) - side0 / 2.0
    max_level = int(math.floor(math.log2(side0 / oracle.resolution_floor) + 1e-9))
    offsets = _cell_sample_offsets(n)
    childbits = np.array(list(np.ndindex((2,) * n)), dtype=np.int64)

    consistency_probe: np.ndarray | None = None
    selected: list[tuple[int, np.ndarray, float]] = []
    residue_cells = 0
    residue_side = side0 / float(2**max_level)

    level = 0
    idx = np.zeros((1, n), dtype=np.int64)
    while idx.shape[0] and level <= max_level:
        h = side0 / float(2**level)
        lo = root_lo[None, :] + idx * h
        hi = lo + h
        diam = math.sqrt(n) * h

        dist = _box_cloud_distance(lo, hi, cloud, box)
        band = (dist >= diam) & (dist <= 4.0 * diam)

        inside = np.zeros(idx.shape[0], dtype=bool)
        if np.any(band):
            pts = lo[band][:, None, :] + offsets[None, :, :] * h
            flat = pts.reshape(-1, n)
            member = oracle.contains(flat).reshape(-1, offsets.shape[0])
            if consistency_probe is None and flat.shape[0]:
                consistency_probe = flat[:: max(1, flat.shape[0] // 512)][:512]
            inside[band] = np.all(member, axis=1)

        take = band & inside
        for i in np.flatnonzero(take):
            selected.append((level, idx[i].copy(), float(dist[i])))

        descend = ~take
        if level == max_level:
            rej = descend
            if np.any(rej):
                prunable = oracle.certified_disjoint(lo[rej], hi[rej])
                residue_cells += int(np.sum(~prunable))
            break
        cand = idx[descend]
        clo, chi = lo[descend], hi[descend]
        prune = oracle.certified_disjoint(clo, chi)
        cand = cand[~prune]
        idx = ((2 * cand)[:, None, :] + childbits[None, :, :]).reshape(-1, n)
        level += 1

    if consistency_probe is not None:
        oracle.check_consistency(consistency_probe)

    order = sorted(range(len(selected)), key=lambda i: (selected[i][0], tuple(selected[i][1])))
    cubes = []
    du = np.empty(len(order))
    for j, i in enumerate(order):
        lvl, ix, d = selected[i]
        cubes.append(DyadicCube(lvl, ix, side0, root_lo.copy()))
        du[j] = d
    dl = np.maximum(du - slack, 0.0)
    uncovered = residue_cells * residue_side**n
    return WhitneyDecomposition(
        cubes, dl, du, dilation_delta, oracle.resolution_floor, uncovered,
        cloud.points.shape[0], cloud.spacing, note,
    )


# ---------------------------------------------------------------------------
# Whitney verification
# ---------------------------------------------------------------------------


@dataclass
class WhitneyCheckReport:
    passed: bool
    n_cubes: int
    disjoint_ok: bool
    distance_ok: bool
    side_ratio_ok: bool
    neighbor_ok: bool
    overlap_ok: bool
    max_side_ratio: float
    max_neighbors: int
    max_overlap: int
    failures: list = field(default_factory=list)
    note: str = ""


def _pair_arrays(cubes) -> tuple[np.ndarray, np.ndarray]:
    levels = np.array([q.level for q in cubes], dtype=np.int64)
    idx = np.array([q.index for q in cubes], dtype=np.int64)
    return levels, idx


def _touch_matrix_block(levels, idx, i0, i1):
    """Exact closed-interval intersection tests for cube block [i0, i1)."""
    m = levels.size
    la = levels[i0:i1][:, None]
    lb = levels[None, :]
    lc = np.maximum(la, lb)
    sa = np.left_shift(np.int64(1), lc - la)
    sb = np.left_shift(np.int64(1), lc - lb)
    a_lo = idx[i0:i1][:, None, :] * sa[:, :, None]
    a_hi = (idx[i0:i1][:, None, :] + 1) * sa[:, :, None]
    b_lo = idx[None, :, :] * sb[:, :, None]
    b_hi = (idx[None, :, :] + 1) * sb[:, :, None]
    closed = np.all(
        (np.maximum(a_lo, b_lo) <= np.minimum(a_hi, b_hi)), axis=2
    )
    open_ = np.all(
        (np.maximum(a_lo, b_lo) < np.minimum(a_hi, b_hi)), axis=2
    )
    # mask only the positional diagonal; listing one cube twice is a
    # genuine interior overlap and must stay visible
    diag = np.arange(i0, i1)[:, None] == np.arange(m)[None, :]
    return closed & ~diag, open_ & ~diag


def verify_whitney(
    decomp: WhitneyDecomposition,
    oracle: OpenSetOracle | None = None,
    mu: PointMassMeasure | None = None,
    num_points: int = 1000,
    seed: int = 0,
    block: int = 64,
) -> WhitneyCheckReport:
    """Check the five decomposition properties on a produced result.

    Interior disjointness and the touching relation are evaluated in
    exact integer lattice arithmetic.  Distance-band checks use the
    decomposition's recorded distances with 1e-9 relative slack for
    float rounding.  The overlap count is evaluated at every atom of mu
    (when given) and at num_points seeded random points of the union.
    """
    cubes = decomp.cubes
    m = len(cubes)
    failures: list[str] = []
    if m == 0:
        return WhitneyCheckReport(True, 0, True, True, True, True, True, 0.0, 0, 0, [], "empty")
    n = cubes[0].dim
    levels, idx = _pair_arrays(cubes)

    disjoint_ok = True
    side_ratio_ok = True
    max_ratio = 0.0
    neighbor_counts = np.zeros(m, dtype=np.int64)
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        touch, interior = _touch_matrix_block(levels, idx, i0, i1)
        if np.any(interior):
            a, b = np.nonzero(interior)
            disjoint_ok = False
            failures.append(
                f"interiors of cubes {i0 + int(a[0])} and {int(b[0])} intersect"
            )
        neighbor_counts[i0:i1] = np.sum(touch, axis=1)
        ta, tb = np.nonzero(touch)
        if ta.size:
            r = 2.0 ** np.abs(levels[i0 + ta] - levels[tb]).astype(float)
            max_ratio = max(max_ratio, float(np.max(r)))
            if np.any(r > 4.0):
                side_ratio_ok = False
                k = int(np.argmax(r))
                failures.append(
                    f"touching cubes {i0 + int(ta[k])} and {int(tb[k])} have side ratio {r[k]}"
                )

    neighbor_bound = 12**n
    max_neighbors = int(np.max(neighbor_counts))
    neighbor_ok = max_neighbors <= neighbor_bound
    if not neighbor_ok:
        failures.append(f"a cube touches {max_neighbors} > {neighbor_bound} others")

    sides = np.array([q.side for q in cubes])
    diam = math.sqrt(n) * sides
    lo_ok = decomp.dist_upper >= diam * (1.0 - 1e-9)
    hi_ok = decomp.dist_upper <= 4.0 * diam * (1.0 + 1e-9)
    bracket_ok = decomp.dist_lower <= decomp.dist_upper
    distance_ok = bool(np.all(lo_ok & hi_ok & bracket_ok))
    if not distance_ok:
        bad = int(np.argmax(~(lo_ok & hi_ok & bracket_ok)))
        failures.append(
            f"cube {bad}: dist {decomp.dist_upper[bad]} outside "
            f"[{diam[bad]}, {4*diam[bad]}]"
        )

    rng = np.random.default_rng(seed)
    vols = sides**n
    pick = rng.choice(m, size=num_points, p=vols / np.sum(vols))
    u = rng.random((num_points, n))
    test_pts = np.array([cubes[j].corner + u[t] * cubes[j].side for t, j in enumerate(pick)])
    if mu is not None:
        test_pts = np.concatenate([mu.points, test_pts])
    overlap = np.zeros(test_pts.shape[0], dtype=np.int64)
    for q in cubes:
        c = q.as_centered().dilated(1.0 + decomp.dilation_delta)
        overlap += c.contains(test_pts)
    max_overlap = int(np.max(overlap)) if overlap.size else 0
    overlap_ok = max_overlap <= neighbor_bound
    if not overlap_ok:
        bad = int(np.argmax(overlap))
        failures.append(
            f"dilated-cube overlap {max_overlap} > {neighbor_bound} at {test_pts[bad]}"
        )

    note = ""
    if oracle is not None and m:
        offsets = _cell_sample_offsets(n)
        pts = np.concatenate(
            [q.corner[None, :] + offsets * q.side for q in cubes]
        )
        member = oracle.contains(pts).reshape(m, -1)
        cov = np.all(member, axis=1)
        if not np.all(cov):
            bad = int(np.argmax(~cov))
            failures.append(f"cube {bad} has a sample point outside the set")
        note = f"membership re-checked on {pts.shape[0]} sample points"

    passed = (
        disjoint_ok and distance_ok and side_ratio_ok and neighbor_ok and overlap_ok
        and not failures
    )
    return WhitneyCheckReport(
        passed, m, disjoint_ok, distance_ok, side_ratio_ok, neighbor_ok,
        overlap_ok, max_ratio, max_neighbors, max_overlap, failures, note,
    )


# ---------------------------------------------------------------------------
# doubling cubes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoublingSearchConfig:
    """Parameters of the doubling-cube searches.

    beta defaults to 2^(n + 0.5) at call time; any explicit value must
    exceed 2^n, the ratio a halving can always reach on uniform mass.
    """

    beta: float | None = None
    max_halvings: int = 60
    dilation_factor: float = 2.0

    def __post_init__(self) -> None:
        if self.max_halvings < 1:
            raise ValueError("max_halvings must be at least 1")
        if self.dilation_factor <= 1.0:
            raise ValueError("dilation_factor must exceed 1")

    def resolved_beta(self, n: int) -> float:
        beta = 2.0 ** (n + 0.5) if self.beta is None else self.beta
        if beta <= 2.0**n:
            raise ValueError(f"beta must exceed 2^n = {2.0**n}, got {beta}")
        return beta


@dataclass(frozen=True)
class SmallDoublingResult:
    cube: CenteredCube
    halvings: int
    beta: float
    trail: tuple  # (side, mass, dilated_mass) per tried cube, outermost first

    def certify_minimal(self) -> bool:
        """Every earlier cube carried no mass or failed the test strictly."""
        for side, mass, big in self.trail[: self.halvings]:
            if mass > 0.0 and big <= self.beta * mass:
                return False
        side, mass, big = self.trail[self.halvings]
        return mass > 0.0 and big <= self.beta * mass


@dataclass(frozen=True)
class BigDoublingResult:
    cube: CenteredCube
    doublings: int
    beta: float
    trail: tuple


def find_small_doubling_cube(
    mu: PointMassMeasure, q0: CenteredCube, cfg: DoublingSearchConfig | None = None
) -> SmallDoublingResult:
    """First concentric halving of q0 that the measure doubles on.

    Walks q0, q0/2, q0/4, ... and returns the first cube Q with mass
    and with the dilated mass within beta of it.  The full (mass,
    dilated mass) trail is kept so minimality can be re-certified.
    """
    cfg = cfg or DoublingSearchConfig()
    n = mu.ambient_dim
    beta = cfg.resolved_beta(n)
    trail = []
    for j in range(cfg.max_halvings):
        q = CenteredCube(q0.center, q0.side / float(2**j))
        mass = cube_mass(mu, q)
        big = cube_mass(mu, q, dilation=cfg.dilation_factor)
        trail.append((q.side, mass, big))
        if mass > 0.0 and big <= beta * mass:
            return SmallDoublingResult(q, j, beta, tuple(trail))
    raise DoublingCubeNotFound(
        f"no doubling cube in {cfg.max_halvings} halvings of side {q0.side}", trail
    )


def find_big_doubling_cube(
    mu: PointMassMeasure,
    x,
    min_side: float,
    cfg: DoublingSearchConfig | None = None,
) -> BigDoublingResult:
    """Grow a cube at x by factors of 2 until the measure doubles on it.

    Terminates for every finite measure: once the dilated cube holds all
    atoms the ratio is 1.
    """
    if not (min_side > 0.0 and math.isfinite(min_side)):
        raise ValueError("min_side must be a positive finite real")
    cfg = cfg or DoublingSearchConfig()
    n = mu.ambient_dim
    beta = cfg.resolved_beta(n)
    center = np.asarray(x, dtype=float).reshape(-1)
    if center.size != n:
        raise ValueError(f"x has dimension {center.size}, expected {n}")
    span = mu.diameter() + float(np.max(np.abs(mu.points - center))) + 1.0
    trail = []
    j = 0
    side = min_side
    # the cap must stay above min_side so the first cube is always tried
    while side <= 4.0 * cfg.dilation_factor * max(span, min_side):
        q = CenteredCube(center, side)
        mass = cube_mass(mu, q)
        big = cube_mass(mu, q, dilation=cfg.dilation_factor)
        trail.append((side, mass, big))
        if mass > 0.0 and big <= beta * mass:
            return BigDoublingResult(q, j, beta, tuple(trail))
        j += 1
        side = min_side * float(2**j)
    raise DoublingCubeNotFound("growth search failed to terminate", trail)


# ---------------------------------------------------------------------------
# bounded-overlap selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BesicovitchSelection:
    selected: tuple
    max_overlap: int
    overlap_bound: int
    all_centers_covered: bool


def besicovitch_select(
    candidates: Sequence[CenteredCube],
    overlap_bound: int | None = None,
    extra_points=None,
) -> BesicovitchSelection:
    """Greedy bounded-overlap subfamily of centered cubes.

    Candidates are ordered by descending side (ties by center), and a
    cube is kept iff its center is not yet covered.  Afterwards every
    candidate center is covered, and the pointwise overlap of the kept
    cubes is measured at all candidate centers, all kept-cube corners,
    and any extra points; exceeding the bound (default 4^n) raises with
    a witness, since centered inputs cannot legitimately do that.
    """
    cands = list(candidates)
    if not cands:
        return BesicovitchSelection((), 0, overlap_bound or 0, True)
    n = len(cands[0].center)
    bound = 4**n if overlap_bound is None else overlap_bound
    order = sorted(range(len(cands)), key=lambda i: (-cands[i].side, tuple(cands[i].center)))

    sel_centers = np.empty((0, n))
    sel_sides = np.empty(0)
    kept: list[CenteredCube] = []
    for i in order:
        c = np.asarray(cands[i].center)
        if sel_sides.size:
            half = sel_sides[:, None] / 2.0
            inside = np.all((c >= sel_centers - half) & (c < sel_centers + half), axis=1)
            if np.any(inside):
                continue
        kept.append(cands[i])
        sel_centers = np.concatenate([sel_centers, c.reshape(1, -1)])
        sel_sides = np.concatenate([sel_sides, [cands[i].side]])

    centers = np.array([q.center for q in cands])
    covered = np.zeros(len(cands), dtype=bool)
    test_pts = [centers]
    for q in kept:
        test_pts.append(q.corners())
    if extra_points is not None:
        ep = np.asarray(extra_points, dtype=float)
        if ep.ndim == 1:
            ep = ep.reshape(-1, n)
        test_pts.append(ep)
    pts = np.concatenate(test_pts)

    overlap = np.zeros(pts.shape[0], dtype=np.int64)
    for q in kept:
        hit = q.contains(pts)
        overlap += hit
        covered |= hit[: len(cands)]
    if not np.all(covered):
        bad = int(np.argmax(~covered))
        raise BesicovitchOverlapError(centers[bad], 0, bound, kind="coverage")
    max_overlap = int(np.max(overlap))
    if max_overlap > bound:
        bad = int(np.argmax(overlap))
        raise BesicovitchOverlapError(pts[bad], max_overlap, bound)
    return BesicovitchSelection(tuple(kept), max_overlap, bound, True)
