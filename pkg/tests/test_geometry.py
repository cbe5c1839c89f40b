import itertools
import random

import pytest

from planarstat.field import PHI, PHI_INV, FieldElement, FieldVec3, dist2, dot, matvec3, ZERO
from planarstat.geometry import (
    SOLID_IDS, GeometryError, are_congruent, build_solid, canonical_subset, compose, compute_group,
    congruence_witness, cycle_lengths, indices_of, inverse_perm, mask_of, orthogonal_matrix,
    pair_distance_profile, path_certificate, popcount, solid_vertices,
)

ORDERS = {"tetrahedron": 24, "cube": 48, "octahedron": 48, "dodecahedron": 120, "icosahedron": 120}
EDGES = {"tetrahedron": 6, "cube": 12, "octahedron": 12, "dodecahedron": 30, "icosahedron": 30}


def test_vertex_nine_and_norms(dodeca):
    assert dodeca.vertices[9] == FieldVec3(ZERO, PHI_INV, -PHI)
    assert dodeca.n == 20
    assert all(dot(v, v) == FieldElement(3) for v in dodeca.vertices)


def test_edge_graph_matches_brute_force(dodeca):
    d = {(i, j): dist2(dodeca.vertices[i], dodeca.vertices[j]) for i, j in itertools.combinations(range(20), 2)}
    shortest = min(d.values())
    brute = sorted(k for k, v in d.items() if v == shortest)
    assert sorted(dodeca.edges) == brute
    assert len(brute) == 30
    assert all(len(a) == 3 for a in dodeca.adjacency)


@pytest.mark.parametrize("solid", SOLID_IDS)
def test_group_order_and_edges(solid):
    model = build_solid(solid)
    assert len(model.group) == ORDERS[solid]
    assert len(model.edges) == EDGES[solid]
    assert tuple(range(model.n)) in model.group


def test_group_closed_under_composition_and_inverse(dodeca):
    group = set(dodeca.group)
    for g in dodeca.group:
        assert inverse_perm(g) in group
        for h in dodeca.group:
            assert compose(g, h) in group


def test_antipodal_map_is_a_symmetry(dodeca):
    V = dodeca.vertices
    antipode = tuple(V.index(-v) for v in V)
    assert antipode in dodeca.group


def test_group_preserves_gram_matrix(dodeca):
    V = dodeca.vertices
    for g in dodeca.group[::7]:
        for i, j in itertools.combinations(range(20), 2):
            assert dot(V[i], V[j]) == dot(V[g[i]], V[g[j]])


@pytest.mark.parametrize("solid", SOLID_IDS)
def test_every_permutation_is_an_exact_orthogonal_map(solid):
    model = build_solid(solid)
    for g in model.group:
        M = orthogonal_matrix(model, g)
        for i, v in enumerate(model.vertices):
            assert matvec3(M, v) == model.vertices[g[i]]


def test_compute_group_rejects_off_centre_points():
    pts = [v + FieldVec3.of(1, 0, 0) for v in solid_vertices("cube")]
    with pytest.raises(GeometryError):
        compute_group(pts)


def test_unknown_solid():
    with pytest.raises(GeometryError):
        build_solid("torus")


def test_cycle_lengths_sum_to_n(dodeca):
    for g in dodeca.group:
        assert sum(cycle_lengths(g)) == 20


def test_mask_roundtrip():
    assert indices_of(mask_of([0, 3, 19])) == [0, 3, 19]
    assert popcount(mask_of(range(20))) == 20


def test_canonical_form_is_orbit_invariant(dodeca):
    rng = random.Random(3)
    for _ in range(40):
        x = rng.getrandbits(20)
        c = canonical_subset(dodeca, x)
        assert canonical_subset(dodeca, c) == c
        assert c <= x
        for k in rng.sample(range(120), 10):
            assert canonical_subset(dodeca, dodeca.apply(k, x)) == c
    assert canonical_subset(dodeca, 0) == 0


def test_apply_matches_permutation(dodeca):
    rng = random.Random(5)
    for _ in range(50):
        x = rng.getrandbits(20)
        k = rng.randrange(120)
        g = dodeca.group[k]
        assert dodeca.apply(k, x) == mask_of(g[i] for i in indices_of(x))


def test_congruence_is_an_equivalence(dodeca):
    rng = random.Random(11)
    x = rng.getrandbits(20)
    y = dodeca.apply(17, x)
    z = dodeca.apply(53, y)
    assert are_congruent(dodeca, x, x)
    assert are_congruent(dodeca, x, y) and are_congruent(dodeca, y, x)
    assert are_congruent(dodeca, x, z)
    w = congruence_witness(dodeca, x, z)
    assert dodeca.apply(w, x) == z


def test_s_and_t_are_not_congruent(dodeca, S, T):
    assert not are_congruent(dodeca, S, T)
    assert canonical_subset(dodeca, S) != canonical_subset(dodeca, T)
    assert congruence_witness(dodeca, S, T) is None


def test_s_and_t_share_pair_distances(dodeca, S, T):
    # equal planar statistics but no help from plain distance data either
    assert pair_distance_profile(dodeca, S) == pair_distance_profile(dodeca, T)


@pytest.mark.parametrize("reading", ["graph", "euclidean"])
def test_path_certificate_separates_s_and_t(dodeca, S, T, reading):
    cs = path_certificate(dodeca, S, reading)
    ct = path_certificate(dodeca, T, reading)
    assert cs.paths == ((0, 11, 4, 17),)
    assert ct.paths == ((0, 11, 4, 17),)
    assert cs.invariant != ct.invariant


def test_path_certificate_is_congruence_invariant(dodeca, S):
    base = path_certificate(dodeca, S).invariant
    for k in range(0, 120, 9):
        assert path_certificate(dodeca, dodeca.apply(k, S)).invariant == base
