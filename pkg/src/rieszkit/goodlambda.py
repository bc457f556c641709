"""Distribution-level comparisons between the potential and the maximal
function, scanned over (lambda, epsilon) grids.

Every check here is empirical: operator values are computed at the
atoms (the only points carrying mass), both sides of an inequality are
evaluated on a finite grid, and the reported constant is the supremum
of admissible ratios over that grid.  Constants are therefore lower
bounds on the true ones; a report never claims a counterexample unless
a row genuinely violates with positive mass on both sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measure import OperatorParams, PointMassMeasure, as_values
from .potentials import (
    PotentialOptions,
    lorentz_weak_quasinorm,
    lp_norm,
    layer_cake_integral,
    maximal_functions_many,
    riesz_potential_direct_many,
    riesz_potential_tree,
)

__all__ = [
    "GoodLambdaScanConfig",
    "GoodLambdaReport",
    "WeightedGoodLambdaReport",
    "NormReport",
    "WeakTypeReport",
    "potential_and_maximal",
    "verify_conditional",
    "verify_two_term",
    "verify_weighted",
    "verify_norm_inequality",
    "verify_weak_type",
]


def _default_eps_grid() -> np.ndarray:
    return 2.0 ** -np.arange(0, 9, dtype=float)


@dataclass(frozen=True)
class GoodLambdaScanConfig:
    """Grid layout for the distribution comparisons.

    k is the level multiplier on the left-hand set (also the a of the
    two-term form).  The lambda grid is geometric with lambda_count
    points; unless given explicitly it spans [half the smallest positive
    operator value, 1.1 times the largest].  eps_grid defaults to
    2^0 .. 2^-8, stored descending.  strict_maximal_cap switches the cap
    on the maximal function from "<= eps lambda" to "< eps lambda"; the
    two differ only at exact-tie atoms.
    """

    k: float = 2.0
    lambda_count: int = 64
    lambda_min: float | None = None
    lambda_max: float | None = None
    eps_grid: tuple = field(default_factory=lambda: tuple(_default_eps_grid()))
    strict_maximal_cap: bool = False

    def __post_init__(self) -> None:
        if self.k < 1.0:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.lambda_count < 2:
            raise ValueError("lambda_count must be at least 2")
        eps = np.asarray(self.eps_grid, dtype=float)
        if eps.size == 0 or np.any(eps <= 0.0) or np.any(eps > 1.0):
            raise ValueError("eps grid values must lie in (0, 1]")
        object.__setattr__(self, "eps_grid", tuple(sorted(eps, reverse=True)))

    def lambda_grid(self, values: np.ndarray) -> np.ndarray:
        lo, hi = self.lambda_min, self.lambda_max
        if lo is None or hi is None:
            pos = values[values > 0.0]
            if pos.size == 0:
                lo_d, hi_d = 1e-8, 1.0
            else:
                lo_d = 0.5 * float(np.min(pos))
                hi_d = 1.1 * float(np.max(pos))
            lo = lo_d if lo is None else lo
            hi = hi_d if hi is None else hi
        if not (0.0 < lo < hi):
            raise ValueError(f"need 0 < lambda_min < lambda_max, got [{lo}, {hi}]")
        return np.geomspace(lo, hi, self.lambda_count)


def potential_and_maximal(
    mu: PointMassMeasure,
    f,
    params: OperatorParams,
    opts: PotentialOptions | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Potential and fractional maximal values at every atom."""
    opts = opts or PotentialOptions()
    if opts.method == "tree":
        iaf = riesz_potential_tree(mu, f, params, mu.points, opts)
    else:
        iaf = riesz_potential_direct_many(mu, f, params, mu.points, opts)
    maf, _ = maximal_functions_many(mu, f, params, mu.points)
    return iaf, maf


def _superlevel_masses(masses: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    out = np.empty(grid.size)
    for i, lam in enumerate(grid):
        out[i] = np.sum(masses[values > lam])
    return out


def _exponent_fit(eps: np.ndarray, sup_ratio: np.ndarray) -> tuple[float | None, str]:
    """Least-squares slope of log sup-ratio against log eps.

    A single nonzero entry whose smaller-eps neighbors are all zero
    means the left side vanished faster than any power; that is
    reported as +inf rather than an unfit slope.
    """
    pos = sup_ratio > 0.0
    if not np.any(pos):
        return None, "no nonzero rows, exponent not fit"
    if np.sum(pos) == 1:
        j = int(np.argmax(pos))
        smaller = eps < eps[j]
        if np.any(smaller) and not np.any(sup_ratio[smaller] > 0.0):
            return math.inf, (
                "one nonzero eps row and zero rows below it: decay faster than "
                "any power, reported as inf"
            )
        return None, "one nonzero eps row, slope not identifiable"
    x = np.log(eps[pos])
    y = np.log(sup_ratio[pos])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, f"least-squares fit over {int(np.sum(pos))} eps rows"


@dataclass
class GoodLambdaReport:
    """Grid scan of a distribution inequality.

    Arrays are lambda-major: lhs[i, j] belongs to lambda_grid[i] and
    eps_grid[j].  ratio is NaN on excluded rows (zero base mass).
    """

    kind: str
    k: float
    shape_exp: float
    lambda_grid: np.ndarray
    eps_grid: np.ndarray
    lhs: np.ndarray
    base: np.ndarray
    maximal_term: np.ndarray
    ratio: np.ndarray
    C_emp: float
    exponent_fit: float | None
    notes: list = field(default_factory=list)
    violations: int = 0

    def rows(self):
        for i, lam in enumerate(self.lambda_grid):
            for j, eps in enumerate(self.eps_grid):
                yield {
                    "lambda": float(lam),
                    "eps": float(eps),
                    "lhs": float(self.lhs[i, j]),
                    "mu_E_lambda": float(self.base[i]),
                    "maximal_term": float(self.maximal_term[i, j]),
                    "ratio": None if np.isnan(self.ratio[i, j]) else float(self.ratio[i, j]),
                }

    def header(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "shape_exp": self.shape_exp,
            "C_emp": self.C_emp,
            "exponent_fit": (
                None
                if self.exponent_fit is None
                else ("inf" if math.isinf(self.exponent_fit) else self.exponent_fit)
            ),
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "eps_grid": [float(v) for v in self.eps_grid],
            "violations": self.violations,
            "notes": list(self.notes),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"header": self.header(), "rows": list(self.rows())}, fh, indent=1)
            fh.write("\n")

    def to_csv(self, path) -> None:
        lines = ["lambda,eps,lhs,mu_E_lambda,maximal_term,ratio"]
        for r in self.rows():
            ratio = "" if r["ratio"] is None else repr(r["ratio"])
            lines.append(
                f'{r["lambda"]!r},{r["eps"]!r},{r["lhs"]!r},'
                f'{r["mu_E_lambda"]!r},{r["maximal_term"]!r},{ratio}'
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _prepare(mu, f, params, cfg, opts, iaf, maf):
    cfg = cfg or GoodLambdaScanConfig()
    opts = opts or PotentialOptions()
    if iaf is None or maf is None:
        iaf_c, maf_c = potential_and_maximal(mu, f, params, opts)
        iaf = iaf_c if iaf is None else np.asarray(iaf, dtype=float)
        maf = maf_c if maf is None else np.asarray(maf, dtype=float)
    else:
        iaf = np.asarray(iaf, dtype=float)
        maf = np.asarray(maf, dtype=float)
    if iaf.shape != (mu.natoms,) or maf.shape != (mu.natoms,):
        raise ValueError("operator value arrays must have one entry per atom")
    lam_grid = cfg.lambda_grid(iaf)
    eps_grid = np.asarray(cfg.eps_grid, dtype=float)
    notes = [
        f"k={cfg.k}",
        f"maximal cap {'strict <' if cfg.strict_maximal_cap else '<='} eps*lambda",
        f"diagonal {'excluded' if opts.exclude_diagonal else 'included'} in the potential",
        "constants are grid suprema, lower bounds on the true constants",
    ]
    return cfg, opts, iaf, maf, lam_grid, eps_grid, notes


def verify_conditional(
    mu: PointMassMeasure,
    f,
    params: OperatorParams,
    cfg: GoodLambdaScanConfig | None = None,
    opts: PotentialOptions | None = None,
    iaf=None,
    maf=None,
) -> GoodLambdaReport:
    """Conditional form: mass where the potential is large while the
    maximal function stays capped, against the shape-power of eps times
    the base superlevel mass."""
    cfg, opts, iaf, maf, lam_grid, eps_grid, notes = _prepare(
        mu, f, params, cfg, opts, iaf, maf
    )
    shape = params.shape_exp
    L, E = lam_grid.size, eps_grid.size
    lhs = np.empty((L, E))
    base = _superlevel_masses(mu.masses, iaf, lam_grid)
    maximal_term = np.zeros((L, E))
    ratio = np.full((L, E), np.nan)
    violations = 0
    for i, lam in enumerate(lam_grid):
        big = iaf > cfg.k * lam
        for j, eps in enumerate(eps_grid):
            capped = (maf < eps * lam) if cfg.strict_maximal_cap else (maf <= eps * lam)
            lhs[i, j] = np.sum(mu.masses[big & capped])
            if base[i] > 0.0:
                ratio[i, j] = lhs[i, j] / (eps**shape * base[i])
            elif lhs[i, j] > 0.0:
                violations += 1
    C_emp = float(np.nanmax(ratio)) if np.any(~np.isnan(ratio)) else 0.0
    sup_by_eps = np.zeros(E)
    ok = base > 0.0
    if np.any(ok):
        sup_by_eps = np.max(lhs[ok] / base[ok][:, None], axis=0)
    expo, note = _exponent_fit(eps_grid, sup_by_eps)
    notes.append(note)
    return GoodLambdaReport(
        "conditional", cfg.k, shape, lam_grid, eps_grid, lhs, base,
        maximal_term, ratio, C_emp, expo, notes, violations,
    )


def verify_two_term(
    mu: PointMassMeasure,
    f,
    params: OperatorParams,
    cfg: GoodLambdaScanConfig | None = None,
    opts: PotentialOptions | None = None,
    iaf=None,
    maf=None,
) -> GoodLambdaReport:
    """Two-term form: the k-lambda superlevel mass against the shape
    power term plus the maximal-function superlevel mass.  C_emp is the
    smallest coefficient b that makes every row hold."""
    cfg, opts, iaf, maf, lam_grid, eps_grid, notes = _prepare(
        mu, f, params, cfg, opts, iaf, maf
    )
    shape = params.shape_exp
    L, E = lam_grid.size, eps_grid.size
    base = _superlevel_masses(mu.masses, iaf, lam_grid)
    lhs_l = _superlevel_masses(mu.masses, iaf, cfg.k * lam_grid)
    lhs = np.repeat(lhs_l[:, None], E, axis=1)
    maximal_term = np.empty((L, E))
    for j, eps in enumerate(eps_grid):
        maximal_term[:, j] = _superlevel_masses(mu.masses, maf, eps * lam_grid)
    ratio = np.full((L, E), np.nan)
    ok = base > 0.0
    excess = np.maximum(lhs - maximal_term, 0.0)
    for j, eps in enumerate(eps_grid):
        ratio[ok, j] = excess[ok, j] / (eps**shape * base[ok])
    violations = int(np.sum((~ok)[:, None] & (lhs > 0.0) & (excess > 0.0)))
    C_emp = float(np.nanmax(ratio)) if np.any(~np.isnan(ratio)) else 0.0
    sup_by_eps = np.zeros(E)
    if np.any(ok):
        sup_by_eps = np.max(excess[ok] / base[ok][:, None], axis=0)
    expo, note = _exponent_fit(eps_grid, sup_by_eps)
    notes.append(note)
    notes.append("C_emp is the minimal two-term coefficient b over the grid")
    return GoodLambdaReport(
        "two_term", cfg.k, shape, lam_grid, eps_grid, lhs, base,
        maximal_term, ratio, C_emp, expo, notes, violations,
    )


@dataclass
class WeightedGoodLambdaReport:
    """Weighted scan: all masses are taken against w d(mu).

    ratio[i, j] is the smallest eta making row (lambda_i, eps_j) hold,
    so the per-eta answer is the largest eps whose ratio column stays
    at or below eta for every lambda.  The eps grid is descending, and
    eta results record the first feasible index.
    """

    k: float
    lambda_grid: np.ndarray
    eps_grid: np.ndarray
    lhs: np.ndarray
    base: np.ndarray
    maximal_term: np.ndarray
    ratio: np.ndarray
    eta_results: list  # (eta, eps or None, eps_index or None)
    notes: list = field(default_factory=list)

    def header(self) -> dict:
        return {
            "kind": "weighted",
            "k": self.k,
            "lambda_grid": [float(v) for v in self.lambda_grid],
            "eps_grid": [float(v) for v in self.eps_grid],
            "eta_results": [
                {"eta": e, "eps": eps, "eps_index": idx}
                for e, eps, idx in self.eta_results
            ],
            "notes": list(self.notes),
        }

    def rows(self):
        for i, lam in enumerate(self.lambda_grid):
            for j, eps in enumerate(self.eps_grid):
                yield {
                    "lambda": float(lam),
                    "eps": float(eps),
                    "lhs": float(self.lhs[i, j]),
                    "mu_E_lambda": float(self.base[i]),
                    "maximal_term": float(self.maximal_term[i, j]),
                    "ratio": None if np.isnan(self.ratio[i, j]) else float(self.ratio[i, j]),
                }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"header": self.header(), "rows": list(self.rows())}, fh, indent=1)
            fh.write("\n")

    def to_csv(self, path) -> None:
        lines = ["lambda,eps,lhs,mu_E_lambda,maximal_term,ratio"]
        for r in self.rows():
            ratio = "" if r["ratio"] is None else repr(r["ratio"])
            lines.append(
                f'{r["lambda"]!r},{r["eps"]!r},{r["lhs"]!r},'
                f'{r["mu_E_lambda"]!r},{r["maximal_term"]!r},{ratio}'
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def verify_weighted(
    mu: PointMassMeasure,
    f,
    w,
    params: OperatorParams,
    cfg: GoodLambdaScanConfig | None = None,
    etas: Sequence[float] = (0.5, 0.1),
    opts: PotentialOptions | None = None,
    iaf=None,
    maf=None,
) -> WeightedGoodLambdaReport:
    """Weighted two-term scan, quantified the way the weighted claim is:
    for each eta, find an eps under which every lambda row holds.

    Any eps below a feasible one is also feasible (shrinking eps only
    grows the maximal term), so "an eps exists" is witnessed by the
    largest feasible grid value, which is what gets reported.
    """
    cfg, opts, iaf, maf, lam_grid, eps_grid, notes = _prepare(
        mu, f, params, cfg, opts, iaf, maf
    )
    wv = as_values(mu, w, name="w")
    if np.any(wv < 0.0):
        raise ValueError("weight must be nonnegative at every atom")
    wm = mu.masses * wv
    for e in etas:
        if not (e > 0.0):
            raise ValueError(f"eta must be positive, got {e}")

    L, E = lam_grid.size, eps_grid.size
    base = _superlevel_masses(wm, iaf, lam_grid)
    lhs_l = _superlevel_masses(wm, iaf, cfg.k * lam_grid)
    lhs = np.repeat(lhs_l[:, None], E, axis=1)
    maximal_term = np.empty((L, E))
    for j, eps in enumerate(eps_grid):
        maximal_term[:, j] = _superlevel_masses(wm, maf, eps * lam_grid)
    ratio = np.full((L, E), np.nan)
    ok = base > 0.0
    excess = np.maximum(lhs - maximal_term, 0.0)
    ratio[ok] = excess[ok] / base[ok][:, None]

    hard = np.zeros(E)  # eta needed at each eps, max over lambda rows
    infeasible = np.zeros(E, dtype=bool)
    for j in range(E):
        col_ok = ratio[:, j][ok]
        hard[j] = float(np.max(col_ok)) if col_ok.size else 0.0
        infeasible[j] = bool(np.any((~ok) & (excess[:, j] > 0.0)))
    results = []
    for eta in etas:
        feas = np.flatnonzero((hard <= eta) & ~infeasible)
        if feas.size:
            idx = int(feas[0])  # grid is descending, first hit is largest eps
            results.append((float(eta), float(eps_grid[idx]), idx))
        else:
            results.append((float(eta), None, None))
    notes.append(
        "feasibility is monotone downward in eps; the reported eps is the "
        "largest feasible grid value for each eta"
    )
    return WeightedGoodLambdaReport(
        cfg.k, lam_grid, eps_grid, lhs, base, maximal_term, ratio, results, notes
    )


@dataclass(frozen=True)
class NormReport:
    p: float
    weighted: bool
    norm_potential: float
    norm_maximal: float
    ratio: float | None
    layer_check_potential: float
    layer_check_maximal: float
    zero_denominator_flag: bool
    notes: tuple

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "weighted": self.weighted,
            "norm_potential": self.norm_potential,
            "norm_maximal": self.norm_maximal,
            "ratio": self.ratio,
            "layer_check_potential": self.layer_check_potential,
            "layer_check_maximal": self.layer_check_maximal,
            "zero_denominator_flag": self.zero_denominator_flag,
            "notes": list(self.notes),
        }


def verify_norm_inequality(
    mu: PointMassMeasure,
    f,
    params: OperatorParams,
    p: float,
    w=None,
    opts: PotentialOptions | None = None,
    iaf=None,
    maf=None,
) -> NormReport:
    """p-norm of the potential against the p-norm of the maximal
    function, with a layer-cake cross-check of both norms.

    The unweighted comparison requires 1 < p < inf; with a weight any
    0 < p < inf is allowed.
    """
    if w is None:
        if not (1.0 < p and math.isfinite(p)):
            raise ValueError(f"unweighted comparison needs 1 < p < inf, got {p}")
    else:
        if not (0.0 < p and math.isfinite(p)):
            raise ValueError(f"p must lie in (0, inf), got {p}")
    opts = opts or PotentialOptions()
    if iaf is None or maf is None:
        iaf_c, maf_c = potential_and_maximal(mu, f, params, opts)
        iaf = iaf_c if iaf is None else np.asarray(iaf, dtype=float)
        maf = maf_c if maf is None else np.asarray(maf, dtype=float)
    if not np.all(np.isfinite(iaf)):
        raise ValueError(
            "potential has non-finite values at atoms; evaluate with the "
            "diagonal excluded or truncate"
        )
    norm_i = lp_norm(mu, iaf, p, weight=w)
    norm_m = lp_norm(mu, maf, p, weight=w)
    layer_i = layer_cake_integral(mu, iaf, p, weight=w) ** (1.0 / p)
    layer_m = layer_cake_integral(mu, maf, p, weight=w) ** (1.0 / p)

    def _rel(a: float, b: float) -> float:
        scale = max(abs(a), abs(b))
        return abs(a - b) / scale if scale > 0.0 else 0.0

    flag = False
    if norm_m == 0.0:
        ratio = None if norm_i == 0.0 else math.inf
        flag = norm_i > 0.0
    else:
        ratio = norm_i / norm_m
    notes = (
        f"diagonal {'excluded' if opts.exclude_diagonal else 'included'}",
        "ratio is None when both norms vanish",
    )
    return NormReport(
        p, w is not None, norm_i, norm_m, ratio, _rel(norm_i, layer_i),
        _rel(norm_m, layer_m), flag, notes,
    )


@dataclass(frozen=True)
class WeakTypeReport:
    p: float
    q: float
    exponent_source: str
    quasinorm: float
    f_norm: float
    c_emp: float | None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "exponent_source": self.exponent_source,
            "quasinorm": self.quasinorm,
            "f_norm": self.f_norm,
            "c_emp": self.c_emp,
        }


def verify_weak_type(
    mu: PointMassMeasure,
    f,
    params: OperatorParams,
    p: float,
    exponent_source: str = "growth",
    opts: PotentialOptions | None = None,
    iaf=None,
) -> WeakTypeReport:
    """Weak-type ratio: the Lorentz weak quasinorm of the potential over
    the p-norm of the density.

    The target exponent q solves 1/q = 1/p - alpha/N, with N read from
    the growth exponent by default or from the ambient dimension when
    exponent_source is "ambient".
    """
    if exponent_source == "growth":
        N = params.growth_exp
    elif exponent_source == "ambient":
        N = float(params.ambient_dim)
    else:
        raise ValueError(f"exponent_source must be 'growth' or 'ambient', got {exponent_source!r}")
    if not (1.0 <= p < N / params.alpha):
        raise ValueError(f"p must lie in [1, {N / params.alpha}) for this exponent source")
    q = 1.0 / (1.0 / p - params.alpha / N)
    opts = opts or PotentialOptions()
    if iaf is None:
        iaf = riesz_potential_direct_many(mu, f, params, mu.points, opts)
    else:
        iaf = np.asarray(iaf, dtype=float)
    quasi = lorentz_weak_quasinorm(mu, iaf, q)
    fnorm = lp_norm(mu, f, p)
    c_emp = None if fnorm == 0.0 else quasi / fnorm
    return WeakTypeReport(p, q, exponent_source, quasi, fnorm, c_emp)
