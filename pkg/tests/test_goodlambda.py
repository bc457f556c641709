"""Distribution scans, norm comparisons, and weak-type ratios."""

import math

import numpy as np
import pytest

from rieszkit import (
    GoodLambdaScanConfig,
    OperatorParams,
    PointMassMeasure,
    PotentialOptions,
    lorentz_weak_quasinorm,
    lp_norm,
    maximal_functions_many,
    potential_and_maximal,
    riesz_potential_direct_many,
    riesz_potential_tree,
    verify_conditional,
    verify_norm_inequality,
    verify_two_term,
    verify_weak_type,
    verify_weighted,
)
from rieszkit.goodlambda import _exponent_fit


def grid_measure(k=20):
    """Uniform grid on [0, 1] with matching atom masses."""
    h = 1.0 / (k - 1)
    return PointMassMeasure(np.linspace(0.0, 1.0, k)[:, None], np.full(k, h))


PARAMS = OperatorParams(1, 1.0, 0.5)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError, match="k must be at least 1"):
        GoodLambdaScanConfig(k=0.5)
    with pytest.raises(ValueError, match="lambda_count"):
        GoodLambdaScanConfig(lambda_count=1)
    for bad in [(), (0.0, 0.5), (1.5,), (-0.25,)]:
        with pytest.raises(ValueError, match="eps grid"):
            GoodLambdaScanConfig(eps_grid=bad)


def test_config_orders_eps_descending():
    cfg = GoodLambdaScanConfig(eps_grid=(0.25, 1.0, 0.5))
    assert cfg.eps_grid == (1.0, 0.5, 0.25)
    default = GoodLambdaScanConfig()
    assert default.eps_grid == tuple(2.0 ** -np.arange(9.0))


def test_lambda_grid_layout():
    cfg = GoodLambdaScanConfig(lambda_count=5, lambda_min=0.1, lambda_max=10.0)
    grid = cfg.lambda_grid(np.array([1.0]))
    assert grid.size == 5
    assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(10.0)
    assert np.all(np.diff(np.log(grid)) > 0)

    auto = GoodLambdaScanConfig(lambda_count=8).lambda_grid(np.array([0.2, 3.0, 0.0]))
    assert auto[0] == pytest.approx(0.1) and auto[-1] == pytest.approx(3.3)
    fallback = GoodLambdaScanConfig().lambda_grid(np.zeros(4))
    assert fallback[0] == pytest.approx(1e-8) and fallback[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError, match="lambda_min < lambda_max"):
        GoodLambdaScanConfig(lambda_min=2.0, lambda_max=1.0).lambda_grid(np.array([1.0]))


def test_potential_and_maximal_matches_components():
    mu = grid_measure(12)
    iaf, maf = potential_and_maximal(mu, 1.0, PARAMS)
    assert np.array_equal(iaf, riesz_potential_direct_many(mu, 1.0, PARAMS, mu.points))
    assert np.array_equal(maf, maximal_functions_many(mu, 1.0, PARAMS, mu.points)[0])
    opts = PotentialOptions(method="tree", tree_theta=0.5, tree_tol=1e-6)
    iaf_t, _ = potential_and_maximal(mu, 1.0, PARAMS, opts)
    assert np.array_equal(iaf_t, riesz_potential_tree(mu, 1.0, PARAMS, mu.points, opts))


# ---------------------------------------------------------------------------
# conditional scan
# ---------------------------------------------------------------------------


def test_conditional_matches_brute_recomputation():
    mu = grid_measure()
    cfg = GoodLambdaScanConfig(lambda_count=16)
    report = verify_conditional(mu, 1.0, PARAMS, cfg)
    iaf, maf = potential_and_maximal(mu, 1.0, PARAMS)
    shape = PARAMS.shape_exp
    worst = 0.0
    for i, lam in enumerate(report.lambda_grid):
        base = float(np.sum(mu.masses[iaf > lam]))
        assert report.base[i] == base
        for j, eps in enumerate(report.eps_grid):
            lhs = float(np.sum(mu.masses[(iaf > 2.0 * lam) & (maf <= eps * lam)]))
            assert report.lhs[i, j] == lhs
            if base > 0.0:
                worst = max(worst, lhs / (eps**shape * base))
    assert report.C_emp == pytest.approx(worst, rel=1e-12)
    assert report.violations == 0
    assert report.kind == "conditional"


def test_conditional_frozen_constants():
    report = verify_conditional(grid_measure(), 1.0, PARAMS, GoodLambdaScanConfig(lambda_count=16))
    assert report.C_emp == pytest.approx(0.6, rel=1e-9)
    # only the eps = 1 row is ever nonzero on this instance, so the
    # decay is faster than any power and reported as inf
    assert report.exponent_fit == math.inf
    assert any("inf" in note for note in report.notes)


def test_conditional_strict_cap_never_sees_more_mass():
    mu = grid_measure(15)
    cfg_loose = GoodLambdaScanConfig(lambda_count=12)
    cfg_strict = GoodLambdaScanConfig(lambda_count=12, strict_maximal_cap=True)
    loose = verify_conditional(mu, 1.0, PARAMS, cfg_loose)
    strict = verify_conditional(mu, 1.0, PARAMS, cfg_strict)
    assert np.all(strict.lhs <= loose.lhs)
    assert any("strict <" in note for note in strict.notes)
    assert any("<= eps*lambda" in note for note in loose.notes)


def test_conditional_rejects_mismatched_value_arrays():
    mu = grid_measure(6)
    with pytest.raises(ValueError, match="one entry per atom"):
        verify_conditional(mu, 1.0, PARAMS, iaf=np.ones(3), maf=np.ones(6))


# ---------------------------------------------------------------------------
# two-term scan
# ---------------------------------------------------------------------------


def test_two_term_c_emp_is_minimal_coefficient():
    mu = grid_measure()
    cfg = GoodLambdaScanConfig(lambda_count=16)
    report = verify_two_term(mu, 1.0, PARAMS, cfg)
    shape = PARAMS.shape_exp
    assert report.C_emp > 0.0
    slack = 1.0 + 1e-12
    holds = 0
    tight = False
    for i in range(report.lambda_grid.size):
        if report.base[i] <= 0.0:
            continue
        for j, eps in enumerate(report.eps_grid):
            rhs = report.C_emp * eps**shape * report.base[i] + report.maximal_term[i, j]
            assert report.lhs[i, j] <= rhs * slack
            holds += 1
            shrunk = report.C_emp * (1.0 - 1e-6) * eps**shape * report.base[i]
            if report.lhs[i, j] > shrunk + report.maximal_term[i, j]:
                tight = True
    assert holds > 0
    assert tight  # any smaller coefficient fails on some row
    assert report.kind == "two_term"
    assert any("minimal two-term coefficient" in n for n in report.notes)


def test_two_term_report_rows_and_serialization(tmp_path):
    mu = grid_measure(10)
    cfg = GoodLambdaScanConfig(lambda_count=4, eps_grid=(1.0, 0.5))
    report = verify_two_term(mu, 1.0, PARAMS, cfg)
    rows = list(report.rows())
    assert len(rows) == 4 * 2
    assert rows[0]["eps"] == 1.0 and rows[1]["eps"] == 0.5
    header = report.header()
    assert header["kind"] == "two_term" and len(header["lambda_grid"]) == 4

    jpath = tmp_path / "scan.json"
    cpath = tmp_path / "scan.csv"
    report.to_json(jpath)
    report.to_csv(cpath)
    import json

    payload = json.loads(jpath.read_text())
    assert payload["header"]["C_emp"] == report.C_emp
    assert len(payload["rows"]) == 8
    lines = cpath.read_text().splitlines()
    assert lines[0] == "lambda,eps,lhs,mu_E_lambda,maximal_term,ratio"
    assert len(lines) == 9
    # repr round trip: the first data row reproduces the report values
    first = lines[1].split(",")
    assert float(first[0]) == report.lambda_grid[0]
    assert float(first[2]) == report.lhs[0, 0]


# ---------------------------------------------------------------------------
# weighted scan
# ---------------------------------------------------------------------------


def test_weighted_with_unit_weight_matches_two_term_arrays():
    mu = grid_measure()
    cfg = GoodLambdaScanConfig(lambda_count=16)
    two = verify_two_term(mu, 1.0, PARAMS, cfg)
    weighted = verify_weighted(mu, 1.0, 1.0, PARAMS, cfg, etas=(0.5, 0.1))
    assert np.array_equal(weighted.lhs, two.lhs)
    assert np.array_equal(weighted.base, two.base)
    assert np.array_equal(weighted.maximal_term, two.maximal_term)
    # weighted ratio drops the eps-power factor
    shape = PARAMS.shape_exp
    for j, eps in enumerate(weighted.eps_grid):
        col_w, col_t = weighted.ratio[:, j], two.ratio[:, j]
        mask = ~np.isnan(col_w)
        assert np.allclose(col_w[mask], col_t[mask] * eps**shape, rtol=1e-12)


def test_weighted_eta_results_are_largest_feasible_eps():
    mu = grid_measure()
    cfg = GoodLambdaScanConfig(lambda_count=16)
    w = 1.0 + np.abs(mu.points[:, 0])
    report = verify_weighted(mu, 1.0, w, PARAMS, cfg, etas=(0.5, 0.1))
    ok = report.base > 0.0
    for eta, eps, idx in report.eta_results:
        assert eps is not None
        assert eps == report.eps_grid[idx]
        # every smaller grid eps stays feasible, the next larger one fails
        for j in range(idx, report.eps_grid.size):
            assert np.nanmax(report.ratio[ok, j]) <= eta
        if idx > 0:
            assert np.nanmax(report.ratio[ok, idx - 1]) > eta
    indices = [idx for _, _, idx in report.eta_results]
    assert indices[0] <= indices[1]  # smaller eta can only push eps down


def test_weighted_frozen_instance():
    mu = grid_measure()
    cfg = GoodLambdaScanConfig(lambda_count=16)
    w = 1.0 + np.abs(mu.points[:, 0])
    report = verify_weighted(mu, 1.0, w, PARAMS, cfg, etas=(0.5, 0.1))
    assert report.eta_results[0] == (0.5, 0.5, 1)
    assert report.eta_results[1] == (0.1, 0.5, 1)
    assert any("largest feasible grid value" in n for n in report.notes)


def test_weighted_validation():
    mu = grid_measure(6)
    with pytest.raises(ValueError, match="eta must be positive"):
        verify_weighted(mu, 1.0, 1.0, PARAMS, etas=(0.5, 0.0))
    with pytest.raises(ValueError, match="nonnegative"):
        verify_weighted(mu, 1.0, np.full(6, -1.0), PARAMS)


def test_weighted_infeasible_eta_reports_none():
    # with only eps = 1 available the excess is positive somewhere, so
    # an absurdly small eta has no feasible grid point
    mu = grid_measure()
    cfg = GoodLambdaScanConfig(lambda_count=16, eps_grid=(1.0,))
    report = verify_weighted(mu, 1.0, 1.0, PARAMS, cfg, etas=(1e-9, 0.9))
    eta, eps, idx = report.eta_results[0]
    assert eps is None and idx is None
    assert report.eta_results[1] == (0.9, 1.0, 0)


# ---------------------------------------------------------------------------
# exponent fit
# ---------------------------------------------------------------------------


def test_exponent_fit_recovers_power_law():
    eps = 2.0 ** -np.arange(6.0)
    for target in (1.0, 2.5):
        slope, note = _exponent_fit(eps, 0.7 * eps**target)
        assert slope == pytest.approx(target, rel=1e-9)
        assert "least-squares" in note


def test_exponent_fit_degenerate_rows():
    eps = np.array([1.0, 0.5, 0.25])
    slope, note = _exponent_fit(eps, np.zeros(3))
    assert slope is None and "no nonzero" in note
    slope, note = _exponent_fit(eps, np.array([0.3, 0.0, 0.0]))
    assert slope == math.inf
    slope, note = _exponent_fit(eps, np.array([0.0, 0.3, 0.0]))
    assert slope == math.inf
    # nonzero only at the smallest eps says nothing about decay
    slope, note = _exponent_fit(eps, np.array([0.0, 0.0, 0.3]))
    assert slope is None and "not identifiable" in note


# ---------------------------------------------------------------------------
# norm inequality
# ---------------------------------------------------------------------------


def test_norm_report_frozen_injected_values():
    mu = PointMassMeasure([[0.0], [1.0], [2.0]], [1.0, 1.0, 2.0])
    iaf = np.array([3.0, 4.0, 0.0])
    maf = np.array([1.0, 2.0, 1.0])
    report = verify_norm_inequality(mu, 1.0, PARAMS, 2.0, iaf=iaf, maf=maf)
    assert report.norm_potential == pytest.approx(5.0, rel=1e-15)
    assert report.norm_maximal == pytest.approx(math.sqrt(7.0), rel=1e-15)
    assert report.ratio == pytest.approx(5.0 / math.sqrt(7.0), rel=1e-12)
    assert report.layer_check_potential <= 1e-12
    assert report.layer_check_maximal <= 1e-12
    assert not report.zero_denominator_flag
    assert not report.weighted
    d = report.to_dict()
    assert d["p"] == 2.0 and d["ratio"] == report.ratio


def test_norm_report_computed_path_layer_checks_vanish():
    mu = grid_measure(12)
    report = verify_norm_inequality(mu, 1.0, PARAMS, 2.0)
    assert report.ratio is not None and report.ratio > 0.0
    assert report.layer_check_potential <= 1e-10
    assert report.layer_check_maximal <= 1e-10
    assert any("diagonal excluded" in n for n in report.notes)
    weighted = verify_norm_inequality(
        mu, 1.0, PARAMS, 0.5, w=1.0 + np.abs(mu.points[:, 0])
    )
    assert weighted.weighted and weighted.ratio > 0.0


def test_norm_report_exponent_validation():
    mu = grid_measure(5)
    for bad in (1.0, 0.5, math.inf):
        with pytest.raises(ValueError, match="1 < p < inf"):
            verify_norm_inequality(mu, 1.0, PARAMS, bad)
    with pytest.raises(ValueError, match=r"p must lie in \(0, inf\)"):
        verify_norm_inequality(mu, 1.0, PARAMS, 0.0, w=1.0)
    # weighted comparison admits small p
    report = verify_norm_inequality(mu, 1.0, PARAMS, 0.5, w=1.0)
    assert report.p == 0.5


def test_norm_report_zero_denominator_flag():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    report = verify_norm_inequality(
        mu, 1.0, PARAMS, 2.0, iaf=np.array([1.0, 2.0]), maf=np.zeros(2)
    )
    assert report.ratio == math.inf and report.zero_denominator_flag
    silent = verify_norm_inequality(
        mu, 1.0, PARAMS, 2.0, iaf=np.zeros(2), maf=np.zeros(2)
    )
    assert silent.ratio is None and not silent.zero_denominator_flag


def test_norm_report_rejects_nonfinite_potential():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="non-finite"):
        verify_norm_inequality(
            mu, 1.0, PARAMS, 2.0, iaf=np.array([math.inf, 1.0]), maf=np.ones(2)
        )


# ---------------------------------------------------------------------------
# weak type
# ---------------------------------------------------------------------------


def test_weak_type_exponent_arithmetic():
    mu = grid_measure(8)
    report = verify_weak_type(mu, 1.0, PARAMS, 1.0)
    assert report.q == pytest.approx(2.0, rel=1e-15)
    assert report.exponent_source == "growth"

    frac = OperatorParams(1, 1.5, 0.5)
    from_growth = verify_weak_type(mu, 1.0, frac, 1.0)
    assert from_growth.q == pytest.approx(1.5, rel=1e-12)
    from_ambient = verify_weak_type(mu, 1.0, frac, 1.0, exponent_source="ambient")
    assert from_ambient.q == pytest.approx(2.0, rel=1e-12)


def test_weak_type_frozen_injected_values():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    report = verify_weak_type(mu, 1.0, PARAMS, 1.0, iaf=np.array([2.0, 1.0]))
    assert report.quasinorm == pytest.approx(2.0, rel=1e-12)
    assert report.f_norm == 2.0
    assert report.c_emp == pytest.approx(1.0, rel=1e-12)
    assert report.to_dict()["q"] == report.q


def test_weak_type_validation_and_zero_density():
    mu = grid_measure(5)
    with pytest.raises(ValueError, match="p must lie"):
        verify_weak_type(mu, 1.0, PARAMS, 2.0)  # p = N/alpha is out of range
    with pytest.raises(ValueError, match="p must lie"):
        verify_weak_type(mu, 1.0, PARAMS, 0.5)
    with pytest.raises(ValueError, match="exponent_source"):
        verify_weak_type(mu, 1.0, PARAMS, 1.0, exponent_source="spectral")
    silent = verify_weak_type(mu, 0.0, PARAMS, 1.0)
    assert silent.f_norm == 0.0 and silent.c_emp is None
    assert silent.quasinorm == 0.0


def test_weak_type_recomputes_from_library_norms():
    mu = grid_measure(14)
    report = verify_weak_type(mu, 1.0, PARAMS, 1.0)
    iaf = riesz_potential_direct_many(mu, 1.0, PARAMS, mu.points)
    assert report.quasinorm == lorentz_weak_quasinorm(mu, iaf, report.q)
    assert report.f_norm == lp_norm(mu, 1.0, 1.0)
    assert report.c_emp == report.quasinorm / report.f_norm
