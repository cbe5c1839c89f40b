import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull, HalfspaceIntersection

from planarstat.geometry import build_solid, mask_of
from planarstat.field import PHI
from planarstat.sections import (
    BinSpec, BinningMismatch, SectionError, build_truncated, cap_points, chi_square_two_sample,
    circumradius, compare_distributions, default_epsilon, edge_length, hit_masks, is_convex,
    plane_frame, polygon_area, sample_plane, sample_planes, section, signature, simulate,
    stratum_of, to_space, total_variation, chunk_rng,
)

R = 2.0


@pytest.fixture(scope="module")
def eps(dodeca):
    return default_epsilon(dodeca)


@pytest.fixture(scope="module")
def K(dodeca, S, T, eps):
    return {"D": build_truncated(dodeca, 0, eps), "S": build_truncated(dodeca, S, eps),
            "T": build_truncated(dodeca, T, eps)}


def test_constants(dodeca):
    assert edge_length(dodeca) == pytest.approx(2 / float(PHI), abs=1e-15)
    assert circumradius(dodeca) == pytest.approx(math.sqrt(3), abs=1e-15)


def test_half_space_counts(dodeca, K):
    assert K["D"].n_halfspaces == 12
    assert build_truncated(dodeca, dodeca.full_mask).n_halfspaces == 32
    assert K["S"].n_halfspaces == 19
    assert int(K["S"].is_cap.sum()) == 7


@pytest.mark.parametrize("bad", [0.0, -0.1, 0.62, 1.0])
def test_cut_depth_out_of_range(dodeca, bad):
    with pytest.raises(SectionError):
        build_truncated(dodeca, 1, bad)


def test_caps_are_congruent_equilateral_triangles(dodeca, eps):
    # the edges at a vertex meet at the pentagon angle of 108 degrees
    side = 2 * eps * math.sin(math.radians(54))
    for v in range(20):
        pts = cap_points(dodeca, v, eps)
        for a, b in itertools.combinations(pts, 2):
            assert np.linalg.norm(a - b) == pytest.approx(side, abs=1e-12)
        assert np.linalg.norm(pts - dodeca.float_vertices[v], axis=1) == pytest.approx([eps] * 3, abs=1e-12)


def test_cap_planes_pass_through_cut_points(dodeca, K, S):
    P = K["S"]
    for n, d, tag in zip(P.normals, P.offsets, P.tags):
        if tag.startswith("cap"):
            v = int(tag.split(":")[1])
            assert np.allclose(cap_points(dodeca, v, default_epsilon(dodeca)) @ n, d, atol=1e-12)
            assert not P.contains(dodeca.float_vertices[v])[0]
    assert P.contains(np.zeros(3))[0]


def test_sampler_shapes():
    rng = np.random.default_rng(0)
    dirs, offs = sample_planes(rng, R, 1000)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1)
    assert np.all(np.abs(offs) <= R)
    s = sample_plane(rng, R)
    assert s.direction.shape == (3,)


@pytest.mark.parametrize("radius", [0.5, 1.0, math.sqrt(3)])
def test_ball_hit_rate(radius):
    n = 200_000
    dirs, offs = sample_planes(chunk_rng(3, 0, 0), R, n)
    # a ball placed off-centre, still inside the sampling window
    centre = np.array([0.1, -0.2, 0.05]) * (R - radius)
    hit = np.abs(dirs @ centre - offs) <= radius
    p = radius / R
    se = math.sqrt(p * (1 - p) / n)
    assert abs(hit.mean() - p) < 3 * se


def test_cube_hit_rate_matches_mean_width():
    cube = build_solid("cube")
    n = 100_000
    dist = simulate(cube, build_truncated(cube, 0), n, seed=5, R=R)
    # the cube [-1, 1]^3 has mean width 3
    p = 3 / (2 * R)
    se = math.sqrt(p * (1 - p) / n)
    assert abs(dist.hit_mass / n - p) < 3 * se


def test_plane_through_top_square(dodeca, K):
    poly = section(K["D"], [0, 0, 1], 1.0, R)
    pts = to_space(poly, [0, 0, 1], 1.0)
    for sx, sy in itertools.product((1, -1), repeat=2):
        assert np.min(np.linalg.norm(pts - [sx, sy, 1], axis=1)) < 1e-9


def test_equatorial_section(dodeca, K):
    poly = section(K["D"], [0, 0, 1], 0.0, R)
    assert len(poly) >= 3
    assert is_convex(poly)
    assert polygon_area(poly) > 0
    assert np.all(np.linalg.norm(to_space(poly, [0, 0, 1], 0.0), axis=1) <= math.sqrt(3) + 1e-12)


def test_far_plane_is_empty(K):
    assert section(K["D"], [0, 0, 1], 1.75, R).shape == (0, 2)
    assert signature(np.empty((0, 2))) is None


def _oracle_area(P, n, d):
    hs = HalfspaceIntersection(np.column_stack([P.normals, -P.offsets]), np.zeros(3))
    verts = hs.intersections
    h = verts @ n - d
    pts = [verts[i] for i in range(len(verts)) if abs(h[i]) < 1e-12]
    for i, j in itertools.combinations(range(len(verts)), 2):
        if h[i] * h[j] < 0:
            t = h[i] / (h[i] - h[j])
            pts.append(verts[i] + t * (verts[j] - verts[i]))
    if len(pts) < 3:
        return 0.0
    u, w = plane_frame(n)
    xy = np.array([[p @ u, p @ w] for p in pts])
    try:
        return ConvexHull(xy).volume
    except Exception:
        return 0.0


def test_section_area_matches_half_space_oracle(K):
    rng = np.random.default_rng(9)
    dirs, offs = sample_planes(rng, 1.6, 150)
    for name in ("D", "S"):
        P = K[name]
        for n, d in zip(dirs, offs):
            poly = section(P, n, d, R)
            got = polygon_area(poly) if len(poly) else 0.0
            assert got == pytest.approx(_oracle_area(P, n, d), abs=1e-9)
            if len(poly):
                assert is_convex(poly)
                assert P.contains(to_space(poly, n, d), tol=1e-9).all()


def _rigid(poly, angle, shift, flip):
    c, s = math.cos(angle), math.sin(angle)
    out = poly @ np.array([[c, -s], [s, c]]).T + shift
    if flip:
        out = out[::-1] * np.array([-1, 1])
    return out


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(-5, 5), st.floats(-5, 5), st.booleans(), st.integers(0, 7))
def test_signature_is_isometry_invariant(angle, dx, dy, flip, roll):
    base = np.array([[0, 0], [1.3, 0], [1.9, 0.7], [1.1, 1.6], [0.2, 1.2]])
    moved = np.roll(_rigid(base, angle, np.array([dx, dy]), flip), roll, axis=0)
    assert signature(moved).code == signature(base).code
    assert signature(moved).area == pytest.approx(signature(base).area, abs=1e-12)


def test_signature_separates_mirror_free_shapes():
    tri = np.array([[0, 0], [3, 0], [0, 1]])
    other = np.array([[0, 0], [3, 0], [1, 1]])
    assert signature(tri).code != signature(other).code


def test_unit_square_signature():
    sig = signature(np.array([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert sig.vertex_count == 4
    assert sig.perimeter == pytest.approx(4)
    assert sig.area == pytest.approx(1)
    assert sig.edge_lengths == pytest.approx((1, 1, 1, 1))


def test_stratum_examples(dodeca):
    assert stratum_of([0, 0, 1], 5.0, dodeca, 0.01) == 0
    assert stratum_of([0, 0, 1], 1.0, dodeca, 0.01) == 4
    mask = int(hit_masks(dodeca, np.array([[0, 0, 1.0]]), np.array([1.0]), 0.01)[0])
    assert mask == mask_of([1, 3, 5, 7])


def test_sections_away_from_all_vertices_coincide(dodeca, K, eps):
    dirs, offs = sample_planes(np.random.default_rng(21), R, 4000)
    m = hit_masks(dodeca, dirs, offs, eps)
    checked = 0
    for n, d in zip(dirs[m == 0], offs[m == 0]):
        a, b, c = (section(K[k], n, d, R) for k in "STD")
        assert a.shape == b.shape == c.shape
        if len(a):
            assert np.max(np.abs(a - b)) < 1e-9
            assert np.max(np.abs(a - c)) < 1e-9
            checked += 1
    assert checked > 500


def test_simulation_is_deterministic_and_thread_independent(dodeca, K, monkeypatch):
    a = simulate(dodeca, K["S"], 70_000, seed=1)
    monkeypatch.setenv("PLANARSTAT_THREADS", "1")
    b = simulate(dodeca, K["S"], 70_000, seed=1)
    assert a.hist == b.hist and a.strata == b.strata and a.cap_profile == b.cap_profile
    assert sum(a.hist.values()) == a.n_samples
    assert sum(c for k, c in a.hist.items() if k[1] > 0) == a.hit_mass


def test_simulation_matches_direct_sections(dodeca, K):
    n = 500
    dist = simulate(dodeca, K["S"], n, seed=2)
    dirs, offs = sample_planes(chunk_rng(2, 0, 0), R, n)
    empty = sum(1 for a, b in zip(dirs, offs) if len(section(K["S"], a, b, R)) == 0)
    assert dist.misses == empty


def test_simulation_rejects_small_window(dodeca, K):
    with pytest.raises(SectionError):
        simulate(dodeca, K["S"], 10, seed=0, R=1.5)


def test_strata_do_not_depend_on_the_subset(dodeca, K):
    a = simulate(dodeca, K["S"], 50_000, seed=3)
    b = simulate(dodeca, K["T"], 50_000, seed=3)
    assert a.strata == b.strata


def test_chi_square_helpers():
    a = {1: 500, 2: 300, 3: 200, 4: 2}
    res = chi_square_two_sample(a, dict(a))
    assert res.statistic == pytest.approx(0)
    assert res.p_value == pytest.approx(1)
    assert res.n_bins == 3  # the tiny bin is folded into its neighbour
    skew = chi_square_two_sample(a, {1: 200, 2: 300, 3: 500})
    assert skew.p_value < 1e-10
    assert total_variation({1: 1}, {2: 1}) == 1
    assert total_variation(a, a) == 0


def test_comparison_requires_matching_binning(dodeca, K):
    a = simulate(dodeca, K["S"], 10_000, seed=1)
    b = simulate(dodeca, K["T"], 10_000, seed=1, spec=BinSpec(area_width=0.5))
    c = simulate(dodeca, K["T"], 20_000, seed=1)
    with pytest.raises(BinningMismatch):
        compare_distributions(a, b)
    with pytest.raises(BinningMismatch):
        compare_distributions(a, c)


def test_same_body_independent_seeds_rarely_reject(dodeca, K):
    rejections = 0
    for seed in range(10):
        a = simulate(dodeca, K["S"], 50_000, seed=seed, stream=0)
        b = simulate(dodeca, K["S"], 50_000, seed=seed, stream=1)
        rejections += compare_distributions(a, b).rejected
    assert rejections <= 1
