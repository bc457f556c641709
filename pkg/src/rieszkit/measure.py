"""Finite point-mass measures on R^n and their ball/cube geometry.

Atoms are stored as a (k, n) coordinate array with strictly positive
masses.  Every integral against the measure is an exact finite sum, so
all queries below are free of discretization error.  Balls are closed,
cubes are half-open boxes [lo, hi), and duplicate atom coordinates are
merged at construction time (masses summed, first occurrence keeps the
slot).

Growth and doubling diagnostics are restricted to an explicit radius
window: an atom makes mu(B(x,r))/r^N blow up as r -> 0, so the
untruncated supremum over all radii is infinite for every atomic
measure and only the windowed scan is meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "OperatorParams",
    "PointMassMeasure",
    "SampledFunction",
    "Ball",
    "CenteredCube",
    "DyadicCube",
    "ScaleRange",
    "CenterPolicy",
    "GrowthReport",
    "DoublingReport",
    "ball_mass",
    "ball_integral",
    "cube_mass",
    "cube_integral",
    "growth_constant_scan",
    "doubling_constant_scan",
    "load_measure",
    "save_measure",
    "load_points",
    "save_points",
    "MeasureFormatError",
]


# ---------------------------------------------------------------------------
# parameter bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorParams:
    """Dimension and exponent bundle shared by the potential operators.

    Parameters
    ----------
    ambient_dim : int
        Coordinate dimension n of the atoms, one of 1, 2, 3.
    growth_exp : float
        Growth exponent N in mu(B(x,r)) <= C r^N.  A positive real; it
        does not need to match ambient_dim (a segment in the plane has
        n = 2 but N = 1).
    alpha : float
        Order of the potential, 0 < alpha < growth_exp.
    """

    ambient_dim: int
    growth_exp: float
    alpha: float

    def __post_init__(self) -> None:
        if self.ambient_dim not in (1, 2, 3):
            raise ValueError(f"ambient_dim must be 1, 2 or 3, got {self.ambient_dim}")
        if not (self.growth_exp > 0 and math.isfinite(self.growth_exp)):
            raise ValueError(f"growth_exp must be a positive real, got {self.growth_exp}")
        if not (0.0 < self.alpha < self.growth_exp):
            raise ValueError(
                f"alpha must satisfy 0 < alpha < growth_exp, got alpha={self.alpha}, "
                f"growth_exp={self.growth_exp}"
            )

    @property
    def kernel_exp(self) -> float:
        """Exponent s = N - alpha of the kernel 1/d^s."""
        return self.growth_exp - self.alpha

    @property
    def shape_exp(self) -> float:
        """Exponent N/(N - alpha) governing the epsilon decay in the scans."""
        return self.growth_exp / (self.growth_exp - self.alpha)


# ---------------------------------------------------------------------------
# coordinate helpers
# ---------------------------------------------------------------------------


def _as_point(x, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"expected a point of dimension {dim}, got shape {arr.shape}")
    return arr


def _as_query_points(x, dim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if dim == 1:
            arr = arr[:, None]
        else:
            arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return arr


def _distances(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    d2 = np.zeros(len(points))
    for a in range(points.shape[1]):
        diff = points[:, a] - x[a]
        d2 += diff * diff
    return np.sqrt(d2)


# ---------------------------------------------------------------------------
# the measure
# ---------------------------------------------------------------------------


class PointMassMeasure:
    """A finite sum of positive point masses sum_i m_i * delta_{y_i}.

    Parameters
    ----------
    points : array_like
        Atom coordinates, shape (k, n).  A flat sequence is read as k
        points on the line.
    masses : array_like
        Strictly positive masses, shape (k,).

    Duplicate coordinates are merged: the first occurrence keeps its
    slot and collects the total mass.  Arrays are stored read-only.
    """

    def __init__(self, points, masses) -> None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("points must be a nonempty (k, n) array")
        if pts.shape[1] not in (1, 2, 3):
            raise ValueError(f"ambient dimension must be 1, 2 or 3, got {pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("atom coordinates must be finite")
        m = np.asarray(masses, dtype=float)
        if m.shape != (pts.shape[0],):
            raise ValueError(f"masses shape {m.shape} does not match {pts.shape[0]} atoms")
        if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
            raise ValueError("masses must be finite and strictly positive")

        pts, m = _merge_duplicate_atoms(pts, m)
        pts.setflags(write=False)
        m.setflags(write=False)
        self._points = pts
        self._masses = m

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    @property
    def ambient_dim(self) -> int:
        return self._points.shape[1]

    @property
    def natoms(self) -> int:
        return self._points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self._masses))

    def __len__(self) -> int:
        return self.natoms

    def __repr__(self) -> str:
        return (
            f"PointMassMeasure(natoms={self.natoms}, dim={self.ambient_dim}, "
            f"total_mass={self.total_mass:.6g})"
        )

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise (lo, hi) over the atoms."""
        return self._points.min(axis=0), self._points.max(axis=0)

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.sqrt(np.sum((hi - lo) ** 2)))

    def min_separation(self) -> float:
        """Smallest positive inter-atom distance; inf for a single atom."""
        if self.natoms < 2:
            return math.inf
        tree = cKDTree(self._points)
        d, _ = tree.query(self._points, k=2)
        return float(np.min(d[:, 1]))

    def support_cube(self, pad: float = 0.0) -> "CenteredCube":
        """Axis-aligned centered cube containing every atom."""
        lo, hi = self.bounding_box()
        center = (lo + hi) / 2.0
        side = float(np.max(hi - lo)) * (1.0 + 1e-12) + 2.0 * pad
        if side <= 0.0:
            side = max(2.0 * pad, 1.0)
        return CenteredCube(tuple(center), side)


def _merge_duplicate_atoms(pts: np.ndarray, masses: np.ndarray):
    uniq = np.unique(pts, axis=0)
    if uniq.shape[0] == pts.shape[0]:
        return pts.copy(), masses.copy()
    seen: dict[tuple, int] = {}
    out_pts: list[np.ndarray] = []
    out_mass: list[float] = []
    for row, m in zip(pts, masses):
        key = tuple(row)
        j = seen.get(key)
        if j is None:
            seen[key] = len(out_pts)
            out_pts.append(row)
            out_mass.append(float(m))
        else:
            out_mass[j] += float(m)
    return np.array(out_pts, dtype=float), np.array(out_mass, dtype=float)


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function at the atoms, aligned with the atom order."""

    values: np.ndarray

    @classmethod
    def for_measure(cls, mu: PointMassMeasure, values) -> "SampledFunction":
        v = np.asarray(values, dtype=float)
        if v.ndim == 0:
            v = np.full(mu.natoms, float(v))
        if v.shape != (mu.natoms,):
            raise ValueError(f"values shape {v.shape} does not match {mu.natoms} atoms")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled values must be finite")
        v = v.copy()
        v.setflags(write=False)
        return cls(v)


def as_values(mu: PointMassMeasure, f, *, name: str = "f") -> np.ndarray:
    """Coerce f (SampledFunction, array or scalar) to a (k,) float array."""
    if isinstance(f, SampledFunction):
        v = f.values
    else:
        v = np.asarray(f, dtype=float)
        if v.ndim == 0:
            v = np.full(mu.natoms, float(v))
    if v.shape != (mu.natoms,):
        raise ValueError(f"{name} has shape {v.shape}, expected ({mu.natoms},)")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite at every atom")
    return v


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball {x : |x - center| <= radius}."""

    center: tuple
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(np.atleast_1d(np.asarray(self.center, float))))
        if not (self.radius >= 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be a finite nonnegative real, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, points) -> np.ndarray:
        pts = _as_query_points(points, self.dim)
        c = np.asarray(self.center)
        return _distances(pts, c) <= self.radius


@dataclass(frozen=True)
class CenteredCube:
    """Half-open axis-aligned cube [c - s/2, c + s/2)^n."""

    center: tuple
    side: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(np.atleast_1d(np.asarray(self.center, float))))
        if not (self.side > 0.0 and math.isfinite(self.side)):
            raise ValueError(f"side must be a finite positive real, got {self.side}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def dilated(self, factor: float) -> "CenteredCube":
        return CenteredCube(self.center, self.side * factor)

    def contains(self, points) -> np.ndarray:
        pts = _as_query_points(points, self.dim)
        c = np.asarray(self.center)
        lo = c - self.side / 2.0
        hi = c + self.side / 2.0
        return np.all((pts >= lo) & (pts < hi), axis=1)

    def corners(self) -> np.ndarray:
        c = np.asarray(self.center)
        lo = c - self.side / 2.0
        hi = c + self.side / 2.0
        grids = np.meshgrid(*[(lo[a], hi[a]) for a in range(self.dim)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass(frozen=True)
class DyadicCube:
    """Cube of generation `level` in the dyadic mesh of a root cube.

    The root cube is [root_corner, root_corner + root_side)^n; the cube
    at (level, index) is the half-open box with corner
    root_corner + index * root_side / 2^level and side root_side / 2^level.
    Corner coordinates are always computed as root + k * side with integer
    k, so shared faces of siblings, cousins and ancestors land on
    identical floats and the 2^n children tile the parent exactly.
    """

    level: int
    index: tuple
    root_side: float
    root_corner: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(int(i) for i in np.atleast_1d(self.index)))
        object.__setattr__(
            self, "root_corner", tuple(np.atleast_1d(np.asarray(self.root_corner, float)))
        )
        if self.level < 0:
            raise ValueError("level must be nonnegative")
        if len(self.index) != len(self.root_corner):
            raise ValueError("index and root_corner must have the same dimension")
        if not (self.root_side > 0.0 and math.isfinite(self.root_side)):
            raise ValueError("root_side must be a finite positive real")
        for i in self.index:
            if not (0 <= i < 2**self.level):
                raise ValueError(f"index {self.index} out of range at level {self.level}")

    @classmethod
    def root(cls, corner, side: float) -> "DyadicCube":
        corner = tuple(np.atleast_1d(np.asarray(corner, float)))
        return cls(0, (0,) * len(corner), float(side), corner)

    @property
    def dim(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return self.root_side * (2.0 ** -self.level)

    @property
    def corner(self) -> np.ndarray:
        s = self.side
        return np.asarray(self.root_corner) + np.asarray(self.index, dtype=float) * s

    @property
    def center(self) -> np.ndarray:
        s = self.side
        return np.asarray(self.root_corner) + (np.asarray(self.index, dtype=float) + 0.5) * s

    @property
    def diam(self) -> float:
        return math.sqrt(self.dim) * self.side

    def children(self) -> list["DyadicCube"]:
        out = []
        for bits in np.ndindex(*(2,) * self.dim):
            idx = tuple(2 * i + b for i, b in zip(self.index, bits))
            out.append(DyadicCube(self.level + 1, idx, self.root_side, self.root_corner))
        return out

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("the root cube has no parent")
        return DyadicCube(
            self.level - 1, tuple(i // 2 for i in self.index), self.root_side, self.root_corner
        )

    def contains(self, points) -> np.ndarray:
        pts = _as_query_points(points, self.dim)
        s = self.side
        root = np.asarray(self.root_corner)
        idx = np.asarray(self.index, dtype=float)
        lo = root + idx * s
        hi = root + (idx + 1.0) * s
        return np.all((pts >= lo) & (pts < hi), axis=1)

    def as_centered(self) -> CenteredCube:
        return CenteredCube(tuple(self.center), self.side)

    def same_mesh(self, other: "DyadicCube") -> bool:
        return (
            self.root_side == other.root_side
            and self.root_corner == other.root_corner
            and self.dim == other.dim
        )

    def is_ancestor_of(self, other: "DyadicCube") -> bool:
        """Strict ancestor test in the shared dyadic tree (exact, integer)."""
        if not self.same_mesh(other) or other.level <= self.level:
            return False
        shift = other.level - self.level
        return all(oi >> shift == si for si, oi in zip(self.index, other.index))

    def touches(self, other: "DyadicCube") -> bool:
        """Closed cubes intersect.  Exact integer arithmetic on indices."""
        if not self.same_mesh(other):
            raise ValueError("cubes from different root meshes are not comparable")
        la, lb = self.level, other.level
        lmax = max(la, lb)
        for sa, sb in zip(self.index, other.index):
            a0 = sa << (lmax - la)
            a1 = (sa + 1) << (lmax - la)
            b0 = sb << (lmax - lb)
            b1 = (sb + 1) << (lmax - lb)
            if a1 < b0 or b1 < a0:
                return False
        return True


def _region_mask(mu: PointMassMeasure, region, dilation: float = 1.0) -> np.ndarray:
    if isinstance(region, Ball):
        if dilation != 1.0:
            region = Ball(region.center, region.radius * dilation)
        return region.contains(mu.points)
    if isinstance(region, DyadicCube):
        region = region.as_centered()
    if isinstance(region, CenteredCube):
        if dilation != 1.0:
            region = region.dilated(dilation)
        return region.contains(mu.points)
    raise TypeError(f"unsupported region type {type(region).__name__}")


# ---------------------------------------------------------------------------
# exact region queries
# ---------------------------------------------------------------------------


def ball_mass(mu: PointMassMeasure, ball: Ball) -> float:
    """mu(B) for a closed ball, an exact sum in atom-index order."""
    mask = ball.contains(mu.points)
    return float(np.sum(mu.masses[mask]))


def ball_integral(mu: PointMassMeasure, f, ball: Ball, *, absolute: bool = False) -> float:
    """Integral of f (or |f|) over a closed ball against mu."""
    v = as_values(mu, f)
    if absolute:
        v = np.abs(v)
    mask = ball.contains(mu.points)
    return float(np.sum((mu.masses * v)[mask]))


def cube_mass(mu: PointMassMeasure, cube, dilation: float = 1.0) -> float:
    """mu(dilation * Q) for a half-open cube, dilated about its center."""
    if dilation < 1.0:
        raise ValueError(f"dilation must be >= 1, got {dilation}")
    mask = _region_mask(mu, cube, dilation)
    return float(np.sum(mu.masses[mask]))


def cube_integral(mu: PointMassMeasure, f, cube, dilation: float = 1.0) -> float:
    if dilation < 1.0:
        raise ValueError(f"dilation must be >= 1, got {dilation}")
    v = as_values(mu, f)
    mask = _region_mask(mu, cube, dilation)
    return float(np.sum((mu.masses * v)[mask]))


# ---------------------------------------------------------------------------
# scan configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleRange:
    """Geometrically spaced radius window [r_min, r_max]."""

    r_min: float
    r_max: float
    num_samples: int = 32

    def __post_init__(self) -> None:
        if not (0.0 < self.r_min < self.r_max and math.isfinite(self.r_max)):
            raise ValueError(
                f"need 0 < r_min < r_max < inf, got r_min={self.r_min}, r_max={self.r_max}"
            )
        if self.num_samples < 2:
            raise ValueError("num_samples must be at least 2")

    @property
    def radii(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.num_samples)

    @classmethod
    def for_measure(cls, mu: PointMassMeasure, num_samples: int = 32) -> "ScaleRange":
        """Window from the minimum atom separation up to the support diameter."""
        r_min = mu.min_separation()
        r_max = mu.diameter()
        if not math.isfinite(r_min) or r_max <= 0.0:
            # single atom or degenerate support: any window works, pick one
            return cls(1.0, 2.0, num_samples)
        return cls(r_min, max(r_max, r_min * 2.0), num_samples)


@dataclass(frozen=True)
class CenterPolicy:
    """Where ball centers are placed during a scan.

    kind "atoms" uses the atoms themselves; "atoms+grid" adds a regular
    lattice of the given spacing over the atom bounding box.
    """

    kind: str = "atoms"
    grid_spacing: float | None = None

    _MAX_GRID = 1 << 18

    def __post_init__(self) -> None:
        if self.kind not in ("atoms", "atoms+grid"):
            raise ValueError(f"unknown center policy {self.kind!r}")
        if self.kind == "atoms+grid":
            if self.grid_spacing is None or self.grid_spacing <= 0:
                raise ValueError("atoms+grid policy needs a positive grid_spacing")

    @classmethod
    def atoms(cls) -> "CenterPolicy":
        return cls("atoms")

    @classmethod
    def atoms_plus_grid(cls, spacing: float) -> "CenterPolicy":
        return cls("atoms+grid", float(spacing))

    def points(self, mu: PointMassMeasure) -> np.ndarray:
        if self.kind == "atoms":
            return mu.points
        lo, hi = mu.bounding_box()
        axes = []
        count = 1
        for a in range(mu.ambient_dim):
            ax = np.arange(lo[a], hi[a] + self.grid_spacing / 2.0, self.grid_spacing)
            if ax.size == 0:
                ax = np.array([lo[a]])
            axes.append(ax)
            count *= ax.size
            if count > self._MAX_GRID:
                raise ValueError(
                    f"center grid would have more than {self._MAX_GRID} nodes; "
                    "increase grid_spacing"
                )
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([g.ravel() for g in mesh], axis=1)
        return np.concatenate([mu.points, grid], axis=0)

    def describe(self) -> str:
        if self.kind == "atoms":
            return "atoms"
        return f"atoms+grid(spacing={self.grid_spacing})"


# ---------------------------------------------------------------------------
# growth / doubling scans
# ---------------------------------------------------------------------------


@dataclass
class GrowthReport:
    """Result of a windowed scan of mu(B(x,r)) / r^N."""

    constant: float
    witness_center: tuple
    witness_radius: float
    radii: np.ndarray
    profile: np.ndarray  # max ratio over centers, per radius
    growth_exp: float
    center_policy: str
    note: str = (
        "supremum restricted to the radius window; at an atom the ratio "
        "diverges like r^-N as r -> 0, so the untruncated supremum is infinite"
    )

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "witness_center": list(self.witness_center),
            "witness_radius": self.witness_radius,
            "radii": [float(r) for r in self.radii],
            "profile": [float(v) for v in self.profile],
            "growth_exp": self.growth_exp,
            "center_policy": self.center_policy,
            "note": self.note,
        }


@dataclass
class DoublingReport:
    """Result of a windowed scan of mu(B(x,2r)) / mu(B(x,r))."""

    constant: float
    witness_center: tuple
    witness_radius: float
    radii: np.ndarray
    profile: np.ndarray  # max ratio over centers with mu(B(x,r)) > 0, per radius
    center_policy: str
    note: str = "ratios taken only over balls with positive inner mass"

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "witness_center": list(self.witness_center),
            "witness_radius": self.witness_radius,
            "radii": [float(r) for r in self.radii],
            "profile": [None if not math.isfinite(v) else float(v) for v in self.profile],
            "center_policy": self.center_policy,
            "note": self.note,
        }


def _center_distance_matrix(centers: np.ndarray, atoms: np.ndarray) -> np.ndarray:
    d2 = np.zeros((centers.shape[0], atoms.shape[0]))
    for a in range(atoms.shape[1]):
        diff = centers[:, a, None] - atoms[None, :, a]
        d2 += diff * diff
    return np.sqrt(d2)


def growth_constant_scan(
    mu: PointMassMeasure,
    params: OperatorParams,
    scales: ScaleRange,
    centers: CenterPolicy | None = None,
) -> GrowthReport:
    """Scan max mu(B(x,r)) / r^N over the window and center set.

    The returned constant is a lower bound for the true supremum over
    all centers and all radii in the window (finitely many samples).
    """
    if mu.ambient_dim != params.ambient_dim:
        raise ValueError("measure dimension does not match params.ambient_dim")
    policy = centers or CenterPolicy.atoms()
    pts = policy.points(mu)
    radii = scales.radii
    if pts.shape[0] == 0 or radii.size == 0:
        raise ValueError("empty scan: no centers or no radii")

    N = params.growth_exp
    dist = _center_distance_matrix(pts, mu.points)
    best = -math.inf
    best_center = pts[0]
    best_radius = radii[0]
    profile = np.empty(radii.size)
    for j, r in enumerate(radii):
        masses_r = np.sum(mu.masses[None, :] * (dist <= r), axis=1)
        ratios = masses_r / r**N
        i = int(np.argmax(ratios))
        profile[j] = ratios[i]
        if ratios[i] > best:
            best = float(ratios[i])
            best_center = pts[i]
            best_radius = float(r)
    return GrowthReport(
        constant=best,
        witness_center=tuple(best_center),
        witness_radius=best_radius,
        radii=radii,
        profile=profile,
        growth_exp=N,
        center_policy=policy.describe(),
    )


def doubling_constant_scan(
    mu: PointMassMeasure,
    scales: ScaleRange,
    centers: CenterPolicy | None = None,
) -> DoublingReport:
    """Scan max mu(B(x,2r)) / mu(B(x,r)) over the window and center set.

    Pairs with empty inner ball are skipped.  The per-radius profile lets
    a caller classify a measure as empirically doubling on the window
    (flat profile) versus growth-only (ratio spikes at some scale).
    """
    policy = centers or CenterPolicy.atoms()
    pts = policy.points(mu)
    radii = scales.radii
    if pts.shape[0] == 0 or radii.size == 0:
        raise ValueError("empty scan: no centers or no radii")

    dist = _center_distance_matrix(pts, mu.points)
    best = -math.inf
    best_center = None
    best_radius = None
    profile = np.full(radii.size, -math.inf)
    any_inner = False
    for j, r in enumerate(radii):
        inner = np.sum(mu.masses[None, :] * (dist <= r), axis=1)
        outer = np.sum(mu.masses[None, :] * (dist <= 2.0 * r), axis=1)
        ok = inner > 0.0
        if not np.any(ok):
            profile[j] = math.nan
            continue
        any_inner = True
        ratios = np.where(ok, outer / np.where(ok, inner, 1.0), -math.inf)
        i = int(np.argmax(ratios))
        profile[j] = ratios[i]
        if ratios[i] > best:
            best = float(ratios[i])
            best_center = pts[i]
            best_radius = float(r)
    if not any_inner:
        raise ValueError("empty scan: every sampled inner ball has zero mass")
    return DoublingReport(
        constant=best,
        witness_center=tuple(best_center),
        witness_radius=best_radius,
        radii=radii,
        profile=profile,
        center_policy=policy.describe(),
    )


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


class MeasureFormatError(ValueError):
    """Raised for malformed measure files, with a line number."""


def load_measure(path) -> tuple[PointMassMeasure, np.ndarray | None, np.ndarray | None]:
    """Read a measure file.

    Format: a header line ``#dim n``, then one atom per line with
    whitespace-separated columns ``x_1 ... x_n mass [f] [w]``.  Every
    atom line must carry the same number of columns.  Later lines
    starting with ``#`` are ignored.  Duplicate coordinates are merged
    with masses summed and f, w combined by mass-weighted average
    (which preserves the integrals f dmu and w dmu).

    Returns (measure, f, w); f and w are None when absent.
    """
    dim: int | None = None
    ncols: int | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if dim is None:
                    parts = line[1:].split()
                    if len(parts) != 2 or parts[0] != "dim":
                        raise MeasureFormatError(
                            f"line {lineno}: expected header '#dim n', got {line!r}"
                        )
                    try:
                        dim = int(parts[1])
                    except ValueError:
                        raise MeasureFormatError(
                            f"line {lineno}: dimension {parts[1]!r} is not an integer"
                        ) from None
                    if dim not in (1, 2, 3):
                        raise MeasureFormatError(f"line {lineno}: dimension must be 1, 2 or 3")
                continue
            if dim is None:
                raise MeasureFormatError(f"line {lineno}: atom line before '#dim n' header")
            fields = line.split()
            if ncols is None:
                ncols = len(fields)
                if ncols not in (dim + 1, dim + 2, dim + 3):
                    raise MeasureFormatError(
                        f"line {lineno}: expected {dim + 1} to {dim + 3} columns, got {ncols}"
                    )
            elif len(fields) != ncols:
                raise MeasureFormatError(
                    f"line {lineno}: expected {ncols} columns, got {len(fields)}"
                )
            try:
                vals = [float(t) for t in fields]
            except ValueError:
                raise MeasureFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise MeasureFormatError(f"line {lineno}: non-finite value")
            if vals[dim] <= 0.0:
                raise MeasureFormatError(
                    f"line {lineno}: mass must be strictly positive, got {vals[dim]}"
                )
            rows.append(vals)
    if dim is None:
        raise MeasureFormatError("missing '#dim n' header")
    if not rows:
        raise MeasureFormatError("measure file has no atoms")

    has_f = ncols >= dim + 2
    has_w = ncols == dim + 3

    # merge duplicates keeping first-occurrence order; f and w are merged
    # by mass-weighted average so their integrals against mu are preserved
    seen: dict[tuple, int] = {}
    pts: list[tuple] = []
    mass: list[float] = []
    fvals: list[float] = []
    wvals: list[float] = []
    for vals in rows:
        key = tuple(vals[:dim])
        m = vals[dim]
        j = seen.get(key)
        if j is None:
            seen[key] = len(pts)
            pts.append(key)
            mass.append(m)
            if has_f:
                fvals.append(vals[dim + 1])
            if has_w:
                wvals.append(vals[dim + 2])
        else:
            tot = mass[j] + m
            if has_f:
                fvals[j] = (fvals[j] * mass[j] + vals[dim + 1] * m) / tot
            if has_w:
                wvals[j] = (wvals[j] * mass[j] + vals[dim + 2] * m) / tot
            mass[j] = tot

    mu = PointMassMeasure(np.array(pts, dtype=float), np.array(mass, dtype=float))
    f = np.array(fvals, dtype=float) if has_f else None
    w = np.array(wvals, dtype=float) if has_w else None
    if w is not None and np.any(w < 0.0):
        raise MeasureFormatError("weight column must be nonnegative")
    return mu, f, w


def load_points(path) -> np.ndarray:
    """Read a query-point file: '#dim n' header, then n coordinates per line."""
    dim: int | None = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if dim is None:
                    parts = line[1:].split()
                    if len(parts) != 2 or parts[0] != "dim":
                        raise MeasureFormatError(
                            f"line {lineno}: expected header '#dim n', got {line!r}"
                        )
                    dim = int(parts[1])
                    if dim not in (1, 2, 3):
                        raise MeasureFormatError(f"line {lineno}: dimension must be 1, 2 or 3")
                continue
            if dim is None:
                raise MeasureFormatError(f"line {lineno}: point line before '#dim n' header")
            fields = line.split()
            if len(fields) != dim:
                raise MeasureFormatError(
                    f"line {lineno}: expected {dim} coordinates, got {len(fields)}"
                )
            try:
                vals = [float(t) for t in fields]
            except ValueError:
                raise MeasureFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise MeasureFormatError(f"line {lineno}: non-finite coordinate")
            rows.append(vals)
    if dim is None:
        raise MeasureFormatError("missing '#dim n' header")
    if not rows:
        raise MeasureFormatError("query file has no points")
    return np.array(rows, dtype=float)


def save_points(path, points) -> None:
    """Write a query-point file (see load_points for the format)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    lines = [f"#dim {pts.shape[1]}"]
    for row in pts:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def save_measure(path, mu: PointMassMeasure, f=None, w=None) -> None:
    """Write a measure file (see load_measure for the format)."""
    cols = [mu.points[:, a] for a in range(mu.ambient_dim)]
    cols.append(mu.masses)
    if f is not None:
        cols.append(as_values(mu, f))
    if w is not None:
        if f is None:
            raise ValueError("cannot write a weight column without a function column")
        wv = np.asarray(w, dtype=float)
        if wv.shape != (mu.natoms,):
            raise ValueError("weight column length does not match the atom count")
        cols.append(wv)
    lines = [f"#dim {mu.ambient_dim}"]
    for i in range(mu.natoms):
        lines.append(" ".join(repr(float(c[i])) for c in cols))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
