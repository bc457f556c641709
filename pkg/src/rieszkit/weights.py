"""Muckenhoupt-type constants of weights against a point-mass measure.

A weight is a nonnegative function sampled at the atoms; w(E) means the
integral of w over E against the measure.  The A_p constant is scanned
over an explicit finite cube family, so every reported value is a lower
bound on the supremum over all cubes and the family is always part of
the report.  The comparison fit is likewise an empirical envelope over
random atom subsets, labeled with its seed, never a certified constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .measure import (
    Ball,
    CenteredCube,
    DyadicCube,
    PointMassMeasure,
    ScaleRange,
    _region_mask,
    as_values,
)

__all__ = [
    "ApConstantReport",
    "AInftyFit",
    "weighted_mass",
    "ap_constant",
    "ainfty_fit",
    "atom_centered_cube_family",
]


def _weight_values(mu: PointMassMeasure, w, positive: bool = False) -> np.ndarray:
    wv = as_values(mu, w, name="w")
    if positive:
        if np.any(wv <= 0.0):
            bad = int(np.argmax(wv <= 0.0))
            raise ValueError(f"weight must be positive at every atom; w[{bad}] = {wv[bad]}")
    elif np.any(wv < 0.0):
        bad = int(np.argmax(wv < 0.0))
        raise ValueError(f"weight must be nonnegative; w[{bad}] = {wv[bad]}")
    return wv


def weighted_mass(mu: PointMassMeasure, w, region) -> float:
    """w-mass of a ball or cube: sum of m_i w_i over atoms inside."""
    wv = _weight_values(mu, w)
    mask = _region_mask(mu, region)
    return float(np.sum((mu.masses * wv)[mask]))


def atom_centered_cube_family(
    mu: PointMassMeasure,
    scales: ScaleRange | None = None,
    sides=None,
    include_support_cube: bool = True,
    max_cubes: int = 65536,
) -> list[CenteredCube]:
    """Cubes centered at every atom with a geometric grid of sides.

    The default grid spans the measure's own scale range; a cube just
    larger than the support is appended so the family always contains
    one cube of full mass.
    """
    if sides is None:
        scales = scales or ScaleRange.for_measure(mu)
        sides = 2.0 * scales.radii
    sides = np.asarray(sides, dtype=float).reshape(-1)
    if np.any(sides <= 0.0):
        raise ValueError("cube sides must be positive")
    if mu.natoms * sides.size > max_cubes:
        raise ValueError(
            f"family of {mu.natoms * sides.size} cubes exceeds the cap {max_cubes}"
        )
    family = [
        CenteredCube(mu.points[i], float(s))
        for i in range(mu.natoms)
        for s in sides
    ]
    if include_support_cube:
        family.append(mu.support_cube())
    return family


@dataclass(frozen=True)
class ApConstantReport:
    p: float
    value: float
    witness_cube: CenteredCube | DyadicCube | Ball
    cube_family: str
    dilation: float
    n_cubes: int

    def to_dict(self) -> dict:
        w = self.witness_cube
        if isinstance(w, Ball):
            witness = {"center": [float(c) for c in w.center], "radius": w.radius}
        elif isinstance(w, CenteredCube):
            witness = {"center": [float(c) for c in w.center], "side": w.side}
        else:
            witness = {"level": w.level, "index": [int(i) for i in w.index], "side": w.side}
        return {
            "p": self.p,
            "value": self.value,
            "witness": witness,
            "cube_family": self.cube_family,
            "dilation": self.dilation,
            "n_cubes": self.n_cubes,
        }


def ap_constant(
    mu: PointMassMeasure,
    w,
    p: float,
    cubes,
    dilation: float = 1.0,
    family_note: str = "caller-supplied",
) -> ApConstantReport:
    """Largest Muckenhoupt product over the cube family.

    For each cube the product (average of w) * (average of w^(-1/(p-1)))
    ^(p-1) is formed with averages against the measure, optionally over
    the dilated cube.  Averaging forces every product to be at least 1,
    so 1 is reported exactly when w is constant on every family cube.
    """
    if not (p > 1.0 and math.isfinite(p)):
        raise ValueError(f"p must lie in (1, inf), got {p}")
    if dilation < 1.0:
        raise ValueError("dilation must be at least 1")
    cubes = list(cubes)
    if not cubes:
        raise ValueError("cube family is empty")
    wv = _weight_values(mu, w, positive=True)
    dual = wv ** (-1.0 / (p - 1.0))
    best = -math.inf
    witness = cubes[0]
    for j, q in enumerate(cubes):
        mask = _region_mask(mu, q, dilation)
        mm = mu.masses[mask]
        total = float(np.sum(mm))
        if total <= 0.0:
            raise ValueError(f"family cube {j} carries no mass")
        avg_w = float(np.sum(mm * wv[mask])) / total
        avg_dual = float(np.sum(mm * dual[mask])) / total
        value = avg_w * avg_dual ** (p - 1.0)
        if value > best:
            best = value
            witness = q
    return ApConstantReport(p, best, witness, family_note, dilation, len(cubes))


@dataclass(frozen=True)
class AInftyFit:
    """Empirical comparison envelope w(E)/w(Q) <= c0 (mu(E)/mu(Q))^delta.

    samples holds the observed (u, v) = (mass fraction, weighted mass
    fraction) pairs; the (delta, c0) pair is the grid fit with the
    smallest c0.  max_violation is recomputed over the samples and is 0
    up to rounding, because the fit is an envelope by construction.
    """

    c0: float
    delta: float
    samples: np.ndarray  # (k, 2) columns u, v
    max_violation: float
    seed: int | None
    sampler: str
    n_samples: int

    def envelope_holds(self, rel: float = 1e-12) -> bool:
        u, v = self.samples[:, 0], self.samples[:, 1]
        return bool(np.all(v <= self.c0 * u**self.delta * (1.0 + rel)))

    def to_dict(self) -> dict:
        return {
            "c0": self.c0,
            "delta": self.delta,
            "max_violation": self.max_violation,
            "seed": self.seed,
            "sampler": self.sampler,
            "n_samples": self.n_samples,
            "note": "sample-based envelope, not a certified constant",
        }


_DELTA_GRID = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])


def ainfty_fit(
    mu: PointMassMeasure,
    w,
    cubes,
    subset_sampler: str = "bernoulli",
    num_samples: int = 200,
    seed: int = 0,
    max_exhaustive_atoms: int = 12,
) -> AInftyFit:
    """Fit the comparison envelope over random atom subsets of cubes.

    The bernoulli sampler draws num_samples subsets E of a random family
    cube (each atom kept with probability 1/2, resampled when empty).
    The exhaustive sampler enumerates every nonempty subset of every
    cube and needs small cubes.  For each delta on a fixed grid the
    envelope constant is max v/u^delta clamped to at least 1; the
    returned pair minimizes c0, preferring larger delta on ties.
    """
    cubes = list(cubes)
    if not cubes:
        raise ValueError("cube family is empty")
    if subset_sampler not in ("bernoulli", "exhaustive"):
        raise ValueError(f"unknown subset sampler {subset_sampler!r}")
    wv = _weight_values(mu, w, positive=True)
    mw = mu.masses * wv

    atom_sets = []
    for j, q in enumerate(cubes):
        sel = np.flatnonzero(_region_mask(mu, q))
        if sel.size == 0:
            raise ValueError(f"family cube {j} carries no mass")
        atom_sets.append(sel)

    pairs = []
    if subset_sampler == "exhaustive":
        used_seed = None
        for sel in atom_sets:
            if sel.size > max_exhaustive_atoms:
                raise ValueError(
                    f"cube holds {sel.size} atoms; exhaustive enumeration is capped "
                    f"at {max_exhaustive_atoms}, use the bernoulli sampler"
                )
            mq = float(np.sum(mu.masses[sel]))
            wq = float(np.sum(mw[sel]))
            for k in range(1, sel.size + 1):
                for combo in itertools.combinations(sel.tolist(), k):
                    ids = np.array(combo)
                    pairs.append(
                        (float(np.sum(mu.masses[ids])) / mq, float(np.sum(mw[ids])) / wq)
                    )
        n_drawn = len(pairs)
    else:
        used_seed = seed
        rng = np.random.default_rng(seed)
        for _ in range(num_samples):
            sel = atom_sets[int(rng.integers(len(cubes)))]
            keep = rng.random(sel.size) < 0.5
            if not np.any(keep):
                keep[int(rng.integers(sel.size))] = True
            ids = sel[keep]
            mq = float(np.sum(mu.masses[sel]))
            wq = float(np.sum(mw[sel]))
            pairs.append(
                (float(np.sum(mu.masses[ids])) / mq, float(np.sum(mw[ids])) / wq)
            )
        n_drawn = num_samples

    samples = np.array(pairs)
    u, v = samples[:, 0], samples[:, 1]
    best_c0, best_delta = math.inf, None
    for delta in _DELTA_GRID:
        c0 = max(1.0, float(np.max(v / u**delta)))
        if c0 < best_c0 or (c0 == best_c0 and best_delta is not None and delta > best_delta):
            best_c0, best_delta = c0, float(delta)
    violation = float(np.max(v - best_c0 * u**best_delta))
    return AInftyFit(
        best_c0, best_delta, samples, max(0.0, violation), used_seed,
        subset_sampler, n_drawn,
    )
