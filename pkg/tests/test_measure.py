import math

import numpy as np
import pytest

from rieszkit.measure import (
    Ball,
    CenteredCube,
    CenterPolicy,
    DyadicCube,
    MeasureFormatError,
    OperatorParams,
    PointMassMeasure,
    ScaleRange,
    ball_integral,
    ball_mass,
    cube_integral,
    cube_mass,
    doubling_constant_scan,
    growth_constant_scan,
    load_measure,
    load_points,
    save_measure,
    save_points,
)


def random_measure(rng, n=None, k=None):
    n = n or int(rng.integers(1, 4))
    k = k or int(rng.integers(2, 30))
    pts = rng.uniform(-1.0, 1.0, size=(k, n))
    masses = rng.uniform(0.1, 2.0, size=k)
    return PointMassMeasure(pts, masses)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


def test_operator_params_exponents():
    p = OperatorParams(1, 1.0, 0.5)
    assert p.kernel_exp == 0.5
    assert p.shape_exp == 2.0
    p = OperatorParams(2, 2.0, 0.5)
    assert p.kernel_exp == 1.5
    assert p.shape_exp == 2.0 / 1.5


def test_operator_params_accepts_fractional_growth_exponent():
    p = OperatorParams(2, 1.5, 0.75)
    assert p.kernel_exp == 0.75
    assert p.shape_exp == 2.0


def test_operator_params_rejects_bad_inputs():
    with pytest.raises(ValueError):
        OperatorParams(4, 2.0, 1.0)
    with pytest.raises(ValueError):
        OperatorParams(1, 1.0, 1.0)  # alpha must stay below N
    with pytest.raises(ValueError):
        OperatorParams(1, 1.0, 0.0)
    with pytest.raises(ValueError):
        OperatorParams(1, -1.0, 0.5)


# ---------------------------------------------------------------------------
# the measure itself
# ---------------------------------------------------------------------------


def test_duplicate_atoms_merge_with_summed_mass():
    mu = PointMassMeasure([[0.0], [1.0], [0.0]], [1.0, 2.0, 3.0])
    assert mu.natoms == 2
    assert mu.total_mass == 6.0
    at_zero = mu.masses[np.nonzero(mu.points[:, 0] == 0.0)[0][0]]
    assert at_zero == 4.0


def test_measure_rejects_bad_inputs():
    with pytest.raises(ValueError):
        PointMassMeasure([[0.0]], [0.0])
    with pytest.raises(ValueError):
        PointMassMeasure([[0.0]], [-1.0])
    with pytest.raises(ValueError):
        PointMassMeasure([[math.nan]], [1.0])
    with pytest.raises(ValueError):
        PointMassMeasure(np.empty((0, 1)), np.empty(0))
    with pytest.raises(ValueError):
        PointMassMeasure(np.zeros((1, 4)), [1.0])


def test_geometry_summaries():
    mu = PointMassMeasure([0.0, 0.25, 1.0], [1.0, 1.0, 1.0])
    assert mu.ambient_dim == 1
    assert mu.min_separation() == 0.25
    assert mu.diameter() == 1.0
    lo, hi = mu.bounding_box()
    assert lo[0] == 0.0 and hi[0] == 1.0
    assert len(mu) == 3


def test_single_atom_min_separation_is_infinite():
    mu = PointMassMeasure([[0.5, 0.5]], [1.0])
    assert mu.min_separation() == math.inf
    cube = mu.support_cube()
    assert bool(cube.contains(mu.points)[0])


def test_support_cube_contains_every_atom():
    rng = np.random.default_rng(11)
    for _ in range(25):
        mu = random_measure(rng)
        cube = mu.support_cube()
        assert np.all(cube.contains(mu.points))


def test_atoms_are_read_only():
    mu = PointMassMeasure([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        mu.points[0, 0] = 5.0
    with pytest.raises(ValueError):
        mu.masses[0] = 5.0


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def test_ball_boundary_is_included():
    b = Ball((0.0,), 1.0)
    got = b.contains(np.array([[1.0], [1.0 + 1e-12], [-1.0]]))
    assert got.tolist() == [True, False, True]


def test_centered_cube_is_half_open():
    q = CenteredCube((0.0, 0.0), 2.0)
    got = q.contains(np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 0.999]]))
    assert got.tolist() == [True, False, True]
    assert q.corners().shape == (4, 2)


def test_cube_dilation_scales_about_the_center():
    q = CenteredCube((1.0,), 1.0)
    assert not q.contains(np.array([[1.7]]))[0]
    assert q.dilated(3.0).contains(np.array([[1.7]]))[0]
    assert q.dilated(3.0).side == 3.0


def test_dyadic_children_tile_the_parent():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        root = DyadicCube.root((0.0,) * n, 1.0)
        cube = root.children()[0].children()[-1]
        pts = rng.uniform(0.0, 1.0, size=(200, n))
        inside = cube.contains(pts)
        counts = np.zeros(pts.shape[0], dtype=int)
        for child in cube.children():
            counts += child.contains(pts).astype(int)
        # each point of the parent lands in exactly one child
        assert np.array_equal(counts, inside.astype(int))


def test_dyadic_faces_land_on_identical_floats():
    rng = np.random.default_rng(13)
    for _ in range(20):
        side = float(rng.uniform(0.3, 3.0))
        corner = float(rng.uniform(-1.0, 1.0))
        level = int(rng.integers(1, 9))
        k = int(rng.integers(0, 2**level - 1))
        left = DyadicCube(level, (k,), side, (corner,))
        right = DyadicCube(level, (k + 1,), side, (corner,))
        # the shared face is one float, not two nearly equal ones
        hi_left = left.root_corner[0] + (k + 1) * left.side
        assert hi_left == right.corner[0]
    root = DyadicCube.root((0.0,), 3.0)
    left = DyadicCube(3, (3,), 3.0, (0.0,))
    assert root.is_ancestor_of(left)
    assert left.parent().parent().parent() == root


def test_dyadic_touches_uses_closed_boxes():
    left = DyadicCube(2, (1,), 1.0, (0.0,))
    right = DyadicCube(2, (2,), 1.0, (0.0,))
    far = DyadicCube(2, (3,), 1.0, (0.0,))
    assert left.touches(right)
    assert not left.touches(far)
    coarse = DyadicCube(1, (1,), 1.0, (0.0,))
    assert left.touches(coarse)
    other_mesh = DyadicCube(2, (1,), 2.0, (0.0,))
    with pytest.raises(ValueError):
        left.touches(other_mesh)


def test_dyadic_corner_touch_in_the_plane():
    a = DyadicCube(1, (0, 0), 1.0, (0.0, 0.0))
    b = DyadicCube(1, (1, 1), 1.0, (0.0, 0.0))
    assert a.touches(b)  # they share only the corner point


# ---------------------------------------------------------------------------
# region sums
# ---------------------------------------------------------------------------


def test_region_sums_small_line_measure():
    mu = PointMassMeasure([0.0, 0.5, 1.0, 2.0], [1.0, 2.0, 4.0, 8.0])
    f = np.array([1.0, -1.0, 1.0, 1.0])
    assert ball_mass(mu, Ball((0.0,), 1.0)) == 7.0
    assert ball_integral(mu, f, Ball((0.0,), 1.0)) == 3.0
    assert ball_integral(mu, f, Ball((0.0,), 1.0), absolute=True) == 7.0
    q = CenteredCube((0.5,), 1.0)  # [0, 1)
    assert cube_mass(mu, q) == 3.0
    assert cube_mass(mu, q, dilation=3.0) == 7.0  # [-1, 2): the atom at 2 is on the open edge
    assert cube_integral(mu, f, q) == -1.0
    with pytest.raises(ValueError):
        cube_mass(mu, q, dilation=0.5)


def test_dyadic_cube_works_as_a_region():
    mu = PointMassMeasure([0.0, 0.25, 0.5], [1.0, 1.0, 1.0])
    root = DyadicCube.root((0.0,), 1.0)
    child = root.children()[0]  # [0, 0.5)
    assert cube_mass(mu, child) == 2.0


# ---------------------------------------------------------------------------
# growth and doubling scans, against a brute-force oracle
# ---------------------------------------------------------------------------


def brute_growth(mu, N, centers, radii):
    best = -math.inf
    for c in centers:
        d = np.sqrt(np.sum((mu.points - c) ** 2, axis=1))
        for r in radii:
            val = float(np.sum(mu.masses[d <= r])) / r**N
            best = max(best, val)
    return best


def brute_doubling(mu, centers, radii):
    best = -math.inf
    for c in centers:
        d = np.sqrt(np.sum((mu.points - c) ** 2, axis=1))
        for r in radii:
            inner = float(np.sum(mu.masses[d <= r]))
            if inner > 0.0:
                best = max(best, float(np.sum(mu.masses[d <= 2.0 * r])) / inner)
    return best


def test_growth_scan_matches_brute_force():
    rng = np.random.default_rng(21)
    for _ in range(20):
        mu = random_measure(rng)
        N = float(rng.uniform(0.5, mu.ambient_dim + 0.5))
        params = OperatorParams(mu.ambient_dim, N, N / 2.0)
        scales = ScaleRange(0.05, 3.0, 9)
        rep = growth_constant_scan(mu, params, scales)
        want = brute_growth(mu, N, mu.points, scales.radii)
        assert rep.constant == pytest.approx(want, rel=1e-12)
        # the witness pair reproduces the reported constant
        d = np.sqrt(np.sum((mu.points - np.asarray(rep.witness_center)) ** 2, axis=1))
        at_witness = float(np.sum(mu.masses[d <= rep.witness_radius])) / rep.witness_radius**N
        assert at_witness == pytest.approx(rep.constant, rel=1e-12)


def test_doubling_scan_matches_brute_force():
    rng = np.random.default_rng(22)
    for _ in range(20):
        mu = random_measure(rng)
        scales = ScaleRange(0.05, 3.0, 9)
        rep = doubling_constant_scan(mu, scales)
        want = brute_doubling(mu, mu.points, scales.radii)
        assert rep.constant == pytest.approx(want, rel=1e-12)
        assert rep.constant >= 1.0


def test_growth_scan_single_atom():
    mu = PointMassMeasure([[0.0]], [1.0])
    params = OperatorParams(1, 1.0, 0.5)
    rep = growth_constant_scan(mu, params, ScaleRange(1.0, 2.0, 2))
    # mass 1 in every ball, so the constant is 1/r_min
    assert rep.constant == 1.0
    assert rep.witness_radius == 1.0


def test_doubling_scan_two_atom_spike():
    mu = PointMassMeasure([0.0, 3.0], [1.0, 1.0])
    rep = doubling_constant_scan(mu, ScaleRange(1.0, 2.0, 3))
    # at r just above 1.5 the doubled ball grabs the far atom
    assert rep.constant == 2.0


def test_growth_scan_grid_centers_extend_the_atom_scan():
    mu = PointMassMeasure([0.0, 1.0], [1.0, 1.0])
    params = OperatorParams(1, 1.0, 0.5)
    scales = ScaleRange(0.5, 0.5000001, 2)
    atoms_only = growth_constant_scan(mu, params, scales)
    with_grid = growth_constant_scan(
        mu, params, scales, CenterPolicy.atoms_plus_grid(0.5)
    )
    # the midpoint center sees both atoms inside radius 1/2: 2 / 0.5 = 4
    assert atoms_only.constant == pytest.approx(2.0, rel=1e-9)
    assert with_grid.constant == pytest.approx(4.0, rel=1e-9)


def test_scan_reports_serialize():
    mu = PointMassMeasure([0.0, 1.0], [1.0, 1.0])
    params = OperatorParams(1, 1.0, 0.5)
    rep = growth_constant_scan(mu, params, ScaleRange(0.5, 2.0, 4))
    d = rep.to_dict()
    assert d["constant"] == rep.constant
    assert len(d["profile"]) == 4
    rep2 = doubling_constant_scan(mu, ScaleRange(0.5, 2.0, 4))
    assert "constant" in rep2.to_dict()


def test_scale_range_validation():
    with pytest.raises(ValueError):
        ScaleRange(0.0, 1.0)
    with pytest.raises(ValueError):
        ScaleRange(2.0, 1.0)
    with pytest.raises(ValueError):
        ScaleRange(1.0, 2.0, 1)
    s = ScaleRange(1.0, 4.0, 3)
    assert np.allclose(s.radii, [1.0, 2.0, 4.0])


def test_scale_range_for_measure_handles_singletons():
    s = ScaleRange.for_measure(PointMassMeasure([[0.0]], [1.0]))
    assert s.r_min < s.r_max
    mu = PointMassMeasure([0.0, 0.25, 1.0], [1.0, 1.0, 1.0])
    s = ScaleRange.for_measure(mu)
    assert s.r_min == 0.25
    assert s.r_max == 1.0


# ---------------------------------------------------------------------------
# file round trips
# ---------------------------------------------------------------------------


def test_measure_file_round_trip(tmp_path):
    rng = np.random.default_rng(31)
    for _ in range(10):
        mu = random_measure(rng)
        f = rng.normal(size=mu.natoms)
        w = rng.uniform(0.1, 3.0, size=mu.natoms)
        path = tmp_path / "m.txt"
        save_measure(path, mu, f, w)
        mu2, f2, w2 = load_measure(path)
        assert np.array_equal(mu2.points, mu.points)
        assert np.array_equal(mu2.masses, mu.masses)
        assert np.array_equal(f2, f)
        assert np.array_equal(w2, w)


def test_measure_file_without_columns(tmp_path):
    mu = PointMassMeasure([[0.0, 1.0]], [2.0])
    path = tmp_path / "m.txt"
    save_measure(path, mu)
    mu2, f2, w2 = load_measure(path)
    assert f2 is None and w2 is None
    assert mu2.total_mass == 2.0


def test_loader_merges_duplicates_preserving_integrals(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("#dim 1\n0.5 1.0 1.0 2.0\n0.5 3.0 2.0 6.0\n1.0 1.0 5.0 1.0\n")
    mu, f, w = load_measure(path)
    assert mu.natoms == 2
    assert mu.masses[0] == 4.0
    assert f[0] == (1.0 * 1.0 + 2.0 * 3.0) / 4.0
    assert w[0] == (2.0 * 1.0 + 6.0 * 3.0) / 4.0


@pytest.mark.parametrize(
    "content,fragment",
    [
        ("0.0 1.0\n", "header"),
        ("#dim 5\n0 0 0 0 0 1\n", "dimension"),
        ("#dim 1\n0.0 1.0 2.0 3.0 4.0\n", "line 2"),
        ("#dim 1\n0.0 1.0\n1.0 1.0 1.0\n", "line 3"),
        ("#dim 1\n0.0 zero\n", "line 2"),
        ("#dim 1\n0.0 -1.0\n", "mass"),
        ("#dim 1\n0.0 inf\n", "line 2"),
        ("#dim 1\n", "no atoms"),
        ("#dim 1\n0.0 1.0 1.0 -2.0\n", "nonnegative"),
    ],
)
def test_loader_rejects_malformed_files(tmp_path, content, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    with pytest.raises(MeasureFormatError) as err:
        load_measure(path)
    assert fragment in str(err.value)


def test_point_file_round_trip(tmp_path):
    rng = np.random.default_rng(32)
    pts = rng.uniform(-5.0, 5.0, size=(17, 2))
    path = tmp_path / "q.txt"
    save_points(path, pts)
    assert np.array_equal(load_points(path), pts)


def test_point_file_rejects_wrong_width(tmp_path):
    path = tmp_path / "q.txt"
    path.write_text("#dim 2\n0.0 0.0\n1.0\n")
    with pytest.raises(MeasureFormatError) as err:
        load_points(path)
    assert "line 3" in str(err.value)


def test_comment_lines_after_the_header_are_ignored(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("#dim 1\n# a note\n0.0 1.0\n\n1.0 2.0\n")
    mu, _, _ = load_measure(path)
    assert mu.natoms == 2
    assert mu.total_mass == 3.0
