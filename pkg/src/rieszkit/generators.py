"""Reproducible measure families for tests, demos, and the harness.

The point of the family is contrast: the grid measures behave like
volume at every location and scale, while the Cantor-style and
segment-plus-bed constructions keep the mass-vs-radius growth bound on
a window but let the ball-doubling ratio blow up at chosen spots.  Each
regime label is checked by a scan in the test suite, not assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measure import PointMassMeasure

__all__ = [
    "GeneratorSpec",
    "gen_lebesgue_grid",
    "gen_power_density",
    "gen_segment_in_plane",
    "gen_cantor_like",
    "gen_random_atoms",
]

_NODE_CAP = 2**20


def _bounds_array(bounds) -> np.ndarray:
    b = np.asarray(bounds, dtype=float)
    if b.ndim == 1:
        b = b.reshape(1, 2)
    if b.ndim != 2 or b.shape[1] != 2 or not (1 <= b.shape[0] <= 3):
        raise ValueError("bounds must be (lo, hi) pairs for 1 to 3 axes")
    if np.any(b[:, 0] >= b[:, 1]) or not np.all(np.isfinite(b)):
        raise ValueError("each bound must satisfy lo < hi with finite values")
    return b


def _grid_nodes(b: np.ndarray, h: float) -> np.ndarray:
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"spacing must be a positive finite real, got {h}")
    axes = []
    total = 1
    for lo, hi in b:
        k = int(math.floor((hi - lo) / h + 1e-9))
        axes.append(lo + h * np.arange(k + 1))
        total *= k + 1
        if total > _NODE_CAP:
            raise ValueError(f"grid would exceed {_NODE_CAP} nodes")
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def gen_lebesgue_grid(bounds, h: float) -> PointMassMeasure:
    """Uniform grid with inclusive endpoints, every node carrying h^n.

    A discrete stand-in for volume: the ball-doubling ratio stays near
    2^n away from the boundary of the box.
    """
    b = _bounds_array(bounds)
    pts = _grid_nodes(b, h)
    mass = h ** b.shape[0]
    return PointMassMeasure(pts, np.full(pts.shape[0], mass))


def gen_power_density(bounds, h: float, gamma: float, center=None) -> PointMassMeasure:
    """Grid measure with node mass h^n |x - center|^gamma.

    A node exactly at the center would carry zero mass for positive
    gamma and is dropped.
    """
    b = _bounds_array(bounds)
    if not math.isfinite(gamma):
        raise ValueError("gamma must be finite")
    pts = _grid_nodes(b, h)
    c = np.zeros(b.shape[0]) if center is None else np.asarray(center, dtype=float).reshape(-1)
    if c.size != b.shape[0]:
        raise ValueError(f"center has dimension {c.size}, expected {b.shape[0]}")
    r = np.sqrt(np.sum((pts - c) ** 2, axis=1))
    keep = r > 0.0
    if not np.any(keep):
        raise ValueError("every node sits at the density center")
    masses = h ** b.shape[0] * r[keep] ** gamma
    return PointMassMeasure(pts[keep], masses)


def gen_segment_in_plane(
    length: float = 1.0,
    h: float = 2.0**-7,
    plane_box=((-0.5, 1.5), (-0.5, 1.5)),
    bed_spacing: float = 0.125,
    include_bed: bool = True,
) -> PointMassMeasure:
    """Arclength-style atoms on a segment plus a sparse planar bed.

    Segment atoms sit at spacing h along the x-axis with mass h, so the
    mass of a ball grows linearly in its radius there.  Bed atoms carry
    mass h times bed_spacing: coarse enough that linear growth survives,
    dense enough that balls jumping from bed onto the segment see a
    large mass ratio.  Coinciding atoms merge.
    """
    if not (length > 0.0 and h > 0.0 and h <= length):
        raise ValueError("need 0 < h <= length")
    k = int(math.floor(length / h + 1e-9))
    seg = np.zeros((k + 1, 2))
    seg[:, 0] = h * np.arange(k + 1)
    pts = [seg]
    masses = [np.full(k + 1, h)]
    if include_bed:
        b = _bounds_array(plane_box)
        if b.shape[0] != 2:
            raise ValueError("plane_box must bound two axes")
        bed = _grid_nodes(b, bed_spacing)
        pts.append(bed)
        masses.append(np.full(bed.shape[0], h * bed_spacing))
    return PointMassMeasure(np.concatenate(pts), np.concatenate(masses))


def gen_cantor_like(levels: int, ratio: float, theta: float) -> PointMassMeasure:
    """Self-similar construction on [0, 1] with unequal mass splitting.

    Each interval of length L spawns children of length ratio*L at its
    ends, the left child receiving a theta share of the mass.  Atoms sit
    at the midpoints of the final-level intervals.  theta away from 1/2
    concentrates mass and breaks ball-doubling uniformity while the
    growth exponent log 2 / log(1/ratio) still fits on a window.
    """
    if not (1 <= levels <= 16):
        raise ValueError("levels must lie in 1..16")
    if not (0.0 < ratio < 0.5):
        raise ValueError("ratio must lie in (0, 1/2)")
    if not (0.0 < theta < 1.0):
        raise ValueError("theta must lie in (0, 1)")
    starts = np.array([0.0])
    length = 1.0
    masses = np.array([1.0])
    for _ in range(levels):
        child = ratio * length
        left = starts
        right = starts + (length - child)
        starts = np.stack([left, right], axis=1).ravel()
        masses = np.stack([theta * masses, (1.0 - theta) * masses], axis=1).ravel()
        length = child
    atoms = (starts + length / 2.0).reshape(-1, 1)
    return PointMassMeasure(atoms, masses)


def gen_random_atoms(count: int, bounds, mass_dist=("uniform", 0.5, 1.5), seed: int = 0) -> PointMassMeasure:
    """Seeded random atoms in a box; coinciding draws merge."""
    if count < 1:
        raise ValueError("count must be at least 1")
    b = _bounds_array(bounds)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(b[:, 0], b[:, 1], size=(count, b.shape[0]))
    kind = mass_dist[0]
    if kind == "uniform":
        lo, hi = float(mass_dist[1]), float(mass_dist[2])
        if not (0.0 < lo <= hi):
            raise ValueError("uniform mass range must be positive")
        masses = rng.uniform(lo, hi, size=count)
    elif kind == "lognormal":
        masses = rng.lognormal(float(mass_dist[1]), float(mass_dist[2]), size=count)
    elif kind == "equal":
        value = float(mass_dist[1])
        if value <= 0.0:
            raise ValueError("equal mass value must be positive")
        masses = np.full(count, value)
    else:
        raise ValueError(f"unknown mass distribution {kind!r}")
    return PointMassMeasure(pts, masses)


_KINDS = ("lebesgue_grid", "power_density", "segment_in_plane", "cantor_like", "random_atoms")


@dataclass(frozen=True)
class GeneratorSpec:
    """Named recipe plus parameters; building twice gives identical atoms."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")

    def build(self) -> PointMassMeasure:
        p = dict(self.params)
        if self.kind == "lebesgue_grid":
            return gen_lebesgue_grid(p["bounds"], p["h"])
        if self.kind == "power_density":
            return gen_power_density(p["bounds"], p["h"], p["gamma"], p.get("center"))
        if self.kind == "segment_in_plane":
            return gen_segment_in_plane(
                p.get("length", 1.0),
                p.get("h", 2.0**-7),
                p.get("plane_box", ((-0.5, 1.5), (-0.5, 1.5))),
                p.get("bed_spacing", 0.125),
                p.get("include_bed", True),
            )
        if self.kind == "cantor_like":
            return gen_cantor_like(p["levels"], p["ratio"], p["theta"])
        return gen_random_atoms(
            p["count"], p["bounds"], p.get("mass_dist", ("uniform", 0.5, 1.5)), self.seed
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}
