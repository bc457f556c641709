"""Muckenhoupt constants and comparison envelopes for weighted measures."""

import math

import numpy as np
import pytest

from rieszkit import (
    AInftyFit,
    Ball,
    CenteredCube,
    PointMassMeasure,
    ScaleRange,
    ainfty_fit,
    ap_constant,
    atom_centered_cube_family,
    weighted_mass,
)


def random_measure(rng, n, k):
    pts = rng.uniform(-2.0, 2.0, size=(k, n))
    masses = rng.lognormal(0.0, 0.7, size=k)
    return PointMassMeasure(pts, masses)


def brute_ap(mu, w, p, cubes, dilation=1.0):
    """Independent recomputation of the largest Muckenhoupt product."""
    wv = np.asarray(w, dtype=float)
    best, best_q = -math.inf, None
    for q in cubes:
        if dilation != 1.0:
            q = q.dilated(dilation)
        mask = q.contains(mu.points)
        mm = mu.masses[mask]
        avg_w = np.average(wv[mask], weights=mm)
        avg_dual = np.average(wv[mask] ** (-1.0 / (p - 1.0)), weights=mm)
        val = avg_w * avg_dual ** (p - 1.0)
        if val > best:
            best, best_q = val, q
    return best, best_q


# ---------------------------------------------------------------------------
# weighted mass
# ---------------------------------------------------------------------------


def test_weighted_mass_ball_and_cube():
    mu = PointMassMeasure([[0.0], [1.0], [2.0]], [1.0, 2.0, 4.0])
    w = [1.0, 0.5, 0.25]
    assert weighted_mass(mu, w, Ball((1.0,), 1.0)) == 3.0
    # half-open cube [0, 2) drops the atom at 2
    assert weighted_mass(mu, w, CenteredCube((1.0,), 2.0)) == 2.0


def test_weighted_mass_rejects_negative_weight():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="nonnegative"):
        weighted_mass(mu, [1.0, -0.5], Ball((0.0,), 5.0))


# ---------------------------------------------------------------------------
# A_p over a cube family
# ---------------------------------------------------------------------------


def test_ap_two_atom_frozen():
    # avg w = 5/2, avg w^{-1} = 5/8, product = 25/16 on the big cube
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    w = [1.0, 4.0]
    small = CenteredCube((0.0,), 0.5)
    big = CenteredCube((0.5,), 2.0)
    report = ap_constant(mu, w, 2.0, [small, big])
    assert report.value == 1.5625
    assert report.witness_cube == big
    assert report.p == 2.0
    assert report.n_cubes == 2
    assert report.dilation == 1.0
    assert report.cube_family == "caller-supplied"


def test_ap_unit_weight_is_exactly_one():
    rng = np.random.default_rng(5)
    mu = random_measure(rng, 2, 9)
    report = ap_constant(mu, 1.0, 3.0, atom_centered_cube_family(mu))
    assert report.value == 1.0


def test_ap_constant_weight_close_to_one():
    rng = np.random.default_rng(6)
    for p in (1.5, 2.0, 4.0):
        mu = random_measure(rng, 1, 7)
        report = ap_constant(mu, 3.7, p, atom_centered_cube_family(mu))
        assert report.value == pytest.approx(1.0, rel=1e-12)


def test_ap_matches_brute_recomputation():
    rng = np.random.default_rng(7)
    for trial in range(20):
        n = int(rng.integers(1, 3))
        mu = random_measure(rng, n, int(rng.integers(3, 9)))
        w = rng.lognormal(0.0, 1.0, size=mu.natoms)
        p = float(rng.choice([1.5, 2.0, 3.0]))
        dilation = float(rng.choice([1.0, 2.0]))
        cubes = atom_centered_cube_family(mu)
        report = ap_constant(mu, w, p, cubes, dilation=dilation)
        expected, _ = brute_ap(mu, w, p, cubes, dilation)
        assert report.value == pytest.approx(expected, rel=1e-12)
        # the witness cube reproduces the reported value
        wit, _ = brute_ap(mu, w, p, [report.witness_cube], dilation)
        assert wit == pytest.approx(report.value, rel=1e-12)


def test_ap_never_below_one():
    rng = np.random.default_rng(8)
    for trial in range(15):
        mu = random_measure(rng, 2, int(rng.integers(2, 7)))
        w = rng.lognormal(0.0, 1.5, size=mu.natoms)
        report = ap_constant(mu, w, 2.5, atom_centered_cube_family(mu))
        assert report.value >= 1.0 - 1e-12


def test_ap_dilation_can_only_see_more_atoms():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    w = [1.0, 9.0]
    cube = CenteredCube((0.0,), 0.5)
    plain = ap_constant(mu, w, 2.0, [cube])
    dilated = ap_constant(mu, w, 2.0, [cube], dilation=8.0)
    assert plain.value == 1.0
    assert dilated.value > 2.0


@pytest.mark.parametrize(
    "p,message",
    [(1.0, "p must lie"), (0.5, "p must lie"), (math.inf, "p must lie")],
)
def test_ap_rejects_bad_exponent(p, message):
    mu = PointMassMeasure([[0.0]], [1.0])
    with pytest.raises(ValueError, match=message):
        ap_constant(mu, 1.0, p, [mu.support_cube()])


def test_ap_rejects_bad_family_and_weight():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="empty"):
        ap_constant(mu, 1.0, 2.0, [])
    with pytest.raises(ValueError, match="dilation"):
        ap_constant(mu, 1.0, 2.0, [mu.support_cube()], dilation=0.5)
    far = CenteredCube((50.0,), 1.0)
    with pytest.raises(ValueError, match="cube 1 carries no mass"):
        ap_constant(mu, 1.0, 2.0, [mu.support_cube(), far])
    with pytest.raises(ValueError, match="must be positive"):
        ap_constant(mu, [1.0, 0.0], 2.0, [mu.support_cube()])


def test_ap_report_to_dict_witness_shapes():
    mu = PointMassMeasure([[0.0, 0.0], [1.0, 1.0]], [1.0, 1.0])
    ball = Ball((0.5, 0.5), 2.0)
    d = ap_constant(mu, [1.0, 2.0], 2.0, [ball]).to_dict()
    assert d["witness"] == {"center": [0.5, 0.5], "radius": 2.0}
    assert d["n_cubes"] == 1 and d["p"] == 2.0
    cube = mu.support_cube()
    d = ap_constant(mu, [1.0, 2.0], 2.0, [cube], family_note="support").to_dict()
    assert d["witness"]["side"] == cube.side
    assert d["cube_family"] == "support"


# ---------------------------------------------------------------------------
# atom-centered cube family
# ---------------------------------------------------------------------------


def test_family_composition_explicit_sides():
    mu = PointMassMeasure([[0.0], [1.0], [3.0]], [1.0, 1.0, 1.0])
    fam = atom_centered_cube_family(mu, sides=[0.5, 1.0])
    assert len(fam) == 3 * 2 + 1
    assert fam[0] == CenteredCube((0.0,), 0.5)
    assert fam[1] == CenteredCube((0.0,), 1.0)
    assert fam[2] == CenteredCube((1.0,), 0.5)
    assert fam[-1] == mu.support_cube()
    trimmed = atom_centered_cube_family(mu, sides=[0.5], include_support_cube=False)
    assert len(trimmed) == 3
    assert all(isinstance(q, CenteredCube) for q in trimmed)


def test_family_default_sides_follow_scale_range():
    rng = np.random.default_rng(9)
    mu = random_measure(rng, 2, 6)
    scales = ScaleRange.for_measure(mu)
    fam = atom_centered_cube_family(mu)
    assert len(fam) == mu.natoms * scales.radii.size + 1
    # the support cube at the end holds every atom
    assert np.all(fam[-1].contains(mu.points))


def test_family_validation():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="positive"):
        atom_centered_cube_family(mu, sides=[1.0, 0.0])
    with pytest.raises(ValueError, match="exceeds the cap"):
        atom_centered_cube_family(mu, sides=np.ones(40), max_cubes=64)


# ---------------------------------------------------------------------------
# comparison envelope fit
# ---------------------------------------------------------------------------


def test_ainfty_exhaustive_two_atom_frozen():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    w = [1.0, 1000.0]
    fit = ainfty_fit(mu, w, [mu.support_cube()], subset_sampler="exhaustive")
    assert fit.sampler == "exhaustive"
    assert fit.seed is None
    assert fit.n_samples == 3  # {0}, {1}, {0,1}
    assert fit.samples.shape == (3, 2)
    # the heavy singleton pins the envelope: c0(d) = (1000/1001) * 2^d,
    # increasing in d, so the fit sits at the smallest grid exponent
    assert fit.delta == 0.1
    assert fit.c0 == pytest.approx((1000.0 / 1001.0) * 2.0**0.1, rel=1e-12)
    loose = (1000.0 / 1001.0) * 2.0
    assert fit.c0 < loose
    assert fit.envelope_holds()
    assert 0.0 <= fit.max_violation < 1e-15


def test_ainfty_unit_weight_hits_floor_at_largest_exponent():
    # with w = 1 every sample has v = u, c0 clamps to 1 for every
    # exponent, and the tie breaks toward the strongest statement
    rng = np.random.default_rng(10)
    mu = random_measure(rng, 1, 8)
    fit = ainfty_fit(mu, 1.0, [mu.support_cube()], subset_sampler="exhaustive")
    assert np.array_equal(fit.samples[:, 0], fit.samples[:, 1])
    assert fit.c0 == 1.0
    assert fit.delta == 1.0
    assert fit.max_violation == 0.0


def test_ainfty_exhaustive_envelope_is_tight():
    rng = np.random.default_rng(11)
    for trial in range(10):
        mu = random_measure(rng, 1, int(rng.integers(2, 7)))
        w = rng.lognormal(0.0, 1.0, size=mu.natoms)
        fit = ainfty_fit(mu, w, [mu.support_cube()], subset_sampler="exhaustive")
        assert fit.envelope_holds()
        u, v = fit.samples[:, 0], fit.samples[:, 1]
        needed = max(1.0, float(np.max(v / u**fit.delta)))
        assert fit.c0 == pytest.approx(needed, rel=1e-12)
        # no smaller grid constant exists at any exponent
        for delta in np.linspace(0.1, 1.0, 10):
            alt = max(1.0, float(np.max(v / u**delta)))
            assert fit.c0 <= alt * (1.0 + 1e-12)


def test_ainfty_bernoulli_seeded_reproducible():
    rng = np.random.default_rng(12)
    mu = random_measure(rng, 2, 20)
    w = 1.0 + np.abs(mu.points[:, 0])
    fam = atom_centered_cube_family(mu)
    fit1 = ainfty_fit(mu, w, fam, num_samples=150, seed=7)
    fit2 = ainfty_fit(mu, w, fam, num_samples=150, seed=7)
    assert fit1.c0 == fit2.c0 and fit1.delta == fit2.delta
    assert np.array_equal(fit1.samples, fit2.samples)
    assert fit1.sampler == "bernoulli"
    assert fit1.seed == 7
    assert fit1.n_samples == 150
    assert fit1.envelope_holds()
    fit3 = ainfty_fit(mu, w, fam, num_samples=150, seed=8)
    assert not np.array_equal(fit1.samples, fit3.samples)


def test_ainfty_validation():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError, match="empty"):
        ainfty_fit(mu, 1.0, [])
    with pytest.raises(ValueError, match="unknown subset sampler"):
        ainfty_fit(mu, 1.0, [mu.support_cube()], subset_sampler="grid")
    far = CenteredCube((9.0,), 0.5)
    with pytest.raises(ValueError, match="carries no mass"):
        ainfty_fit(mu, 1.0, [mu.support_cube(), far])
    with pytest.raises(ValueError, match="must be positive"):
        ainfty_fit(mu, [1.0, 0.0], [mu.support_cube()])
    crowded = PointMassMeasure(np.arange(13.0)[:, None], np.ones(13))
    with pytest.raises(ValueError, match="capped"):
        ainfty_fit(crowded, 1.0, [crowded.support_cube()], subset_sampler="exhaustive")


def test_ainfty_to_dict_and_tampered_envelope():
    mu = PointMassMeasure([[0.0], [1.0]], [1.0, 2.0])
    fit = ainfty_fit(mu, [1.0, 3.0], [mu.support_cube()], subset_sampler="exhaustive")
    d = fit.to_dict()
    assert d["sampler"] == "exhaustive"
    assert "not a certified constant" in d["note"]
    assert set(d) == {"c0", "delta", "max_violation", "seed", "sampler", "n_samples", "note"}
    bogus = AInftyFit(
        c0=1.0, delta=1.0, samples=np.array([[0.5, 0.9]]),
        max_violation=0.0, seed=None, sampler="exhaustive", n_samples=1,
    )
    assert not bogus.envelope_holds()
