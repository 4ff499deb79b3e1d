import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bunchctl.cones import (
    Cone,
    Fan,
    dual_cone,
    face_correspondence,
    gale_transform,
    intersect,
    is_face,
    rel_interior_contains,
    stellar_subdivide,
    unimodular_equivalence,
)
from bunchctl.errors import ValidationError
from bunchctl.groups import GradingMap, lattice_basis

from conftest import DELPEZZO_P, DELPEZZO_Q, torsion_pres
from oracles import brute_faces, brute_facets, dot, intersect_2d, primitive, rank


def vec(n, lo=-4, hi=4):
    return st.tuples(*[st.integers(lo, hi)] * n)


# duality


def test_dual_of_orthant():
    assert dual_cone(Cone.orthant(2)) == Cone.orthant(2)


def test_dual_of_ray_is_halfplane():
    assert dual_cone(Cone([(1, 0)])) == Cone([(1, 0), (0, 1), (0, -1)])


def test_dual_of_skew_cone_by_sampling():
    C = Cone([(2, 1), (1, 2)])
    D = dual_cone(C)
    assert D == Cone([(2, -1), (-1, 2)])
    # oracle: u is in the dual iff <u, g> >= 0 for both generators
    for u in itertools.product(range(-6, 7), repeat=2):
        assert D.contains(u) == (dot(u, (2, 1)) >= 0 and dot(u, (1, 2)) >= 0)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(vec(n), min_size=1, max_size=6)))
def test_dual_of_dual(gens):
    n = len(gens[0])
    C = Cone(gens, n)
    assert dual_cone(dual_cone(C)) == C
    # every generator satisfies every facet inequality, equations vanish
    for g in C.generators:
        assert all(dot(f, g) >= 0 for f in C.facets)
        assert all(dot(e, g) == 0 for e in C.equations)
    assert C.dim == (rank(gens) if any(any(g) for g in gens) else 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(vec(3), min_size=1, max_size=6))
def test_double_description_incidence(gens):
    C = Cone(gens, 3)
    if not C.is_pointed:
        return
    # a ray is extreme iff the facets it lies on have rank dim - 1 within the span
    for r in C.rays:
        tight = [f for f in C.facets if dot(f, r) == 0]
        assert rank(list(tight) + list(C.equations)) == 3 - 1


# intersections


def test_intersection_basics():
    C = Cone([(1, 0), (1, 1)])
    assert intersect(C, C) == C
    assert intersect(Cone([(1, 0)]), Cone([(-1, 0)])) == Cone([], 2)


def test_mov_intersection_delpezzo():
    A = Cone([(-1, 1), (1, 1)])
    B = Cone([(-1, 0), (1, 2)])
    assert intersect(A, B) == Cone([(-1, 1), (1, 2)])
    assert set(intersect(A, B).rays) == intersect_2d([(-1, 1), (1, 1)], [(-1, 0), (1, 2)])


@settings(max_examples=80, deadline=None)
@given(vec(2, 0, 5), vec(2, 0, 5), vec(2, -5, 0).map(lambda v: (abs(v[0]), v[1])), vec(2, 0, 5))
def test_two_dim_intersections_against_angles(a, b, c, d):
    rays = [a, b, c, d]
    if any(not any(r) for r in rays):
        return
    A, B = Cone([a, b]), Cone([c, d])
    if not (A.is_pointed and B.is_pointed and A.dim == 2 and B.dim == 2):
        return
    assert set(intersect(A, B).rays) == intersect_2d([a, b], [c, d])


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        intersect(Cone([(1, 0)]), Cone([(1, 0, 0)]))


# relative interiors and faces


def test_relative_interior_examples():
    assert rel_interior_contains(Cone([], 2), (0, 0))
    C = Cone([(-1, 1), (1, 2)])
    assert rel_interior_contains(C, (0, 1))
    assert not rel_interior_contains(C, (-1, 1))


def _random_pointed(rng, n, k):
    while True:
        gens = [tuple([rng.randint(1, 4)] + [rng.randint(-3, 3) for _ in range(n - 1)]) for _ in range(k)]
        if rank(gens) == n:
            return gens


@pytest.mark.parametrize("n", [2, 3, 4])
def test_faces_agree_with_brute_force(n):
    rng = random.Random(100 + n)
    for _ in range(12):
        gens = _random_pointed(rng, n, rng.randint(n, 8))
        C = Cone(gens, n)
        assert set(C.facets) == brute_facets(gens, n)
        ours = set()
        for F in C.faces():
            ours.add(frozenset(i for i, g in enumerate(gens) if F.contains(g)))
            assert is_face(F, C)
        assert ours == brute_faces(gens, n)


def test_faces_by_dimension():
    C = Cone.orthant(3)
    assert len(C.faces(1)) == 3 and len(C.faces(2)) == 3 and len(C.faces(0)) == 1
    assert not is_face(Cone([(1, 1, 0)]), C)


def test_face_correspondence():
    assert face_correspondence(set(), 5) == frozenset(range(5))
    assert face_correspondence({0, 3}, 5) == frozenset({1, 2, 4})
    rng = random.Random(3)
    for _ in range(20):
        S = frozenset(i for i in range(7) if rng.random() < 0.5)
        assert face_correspondence(face_correspondence(S, 7), 7) == S


# Gale transform


def test_gale_of_identity_is_degenerate():
    g = gale_transform(GradingMap.from_matrix([[1, 0], [0, 1]]))
    assert g.degenerate and g.P == ()


def test_gale_delpezzo_matches_reference_rows():
    Q = GradingMap.from_matrix(DELPEZZO_Q)
    g = gale_transform(Q)
    assert lattice_basis(g.P, 5) == lattice_basis(DELPEZZO_P, 5)
    U = unimodular_equivalence(g.P, DELPEZZO_P)
    assert U is not None
    for row in g.P:
        assert all(sum(q * x for q, x in zip(qrow, row)) == 0 for qrow in DELPEZZO_Q)
    assert g.rank + 2 == 5


def test_gale_torsion_example():
    Q = torsion_pres().grading
    g = gale_transform(Q)
    assert g.rank == 5
    for row in g.P:
        assert Q.image(row).is_zero()


# fans and stellar subdivision


def _sigma0():
    v = [tuple(row[j] for row in DELPEZZO_P) for j in range(5)]
    # maximal cones of the 4-cone fan on v1, v2, v3, v5 (0-based indices)
    return Fan(v, [{0, 1, 2}, {0, 1, 4}, {1, 2, 4}, {0, 2, 4}]), v


def test_textbook_subdivision():
    F = Fan([(1, 0), (0, 1)], [{0, 1}])
    G, idx = stellar_subdivide(F, (1, 1))
    assert idx == 2 and set(G.cones) == {frozenset({0, 2}), frozenset({1, 2})}


def test_subdivide_delpezzo_at_v4():
    F, v = _sigma0()
    assert tuple(2 * a + b + 3 * c for a, b, c in zip(v[0], v[2], v[4])) == v[3]
    G, idx = stellar_subdivide(F, v[3])
    assert idx == 3
    expected = {frozenset(c) for c in [{0, 1, 2}, {0, 1, 4}, {0, 2, 3}, {0, 3, 4}, {1, 2, 4}, {2, 3, 4}]}
    assert set(G.cones) == expected
    assert G.check() == []


def test_subdivide_sigma1_at_v6():
    v = [tuple(row[j] for row in DELPEZZO_P) for j in range(5)]
    cones = [{0, 1, 2}, {0, 1, 4}, {0, 2, 3}, {0, 3, 4}, {1, 2, 4}, {2, 3, 4}]
    F = Fan(v, cones)
    G, idx = stellar_subdivide(F, (0, -1, -1))
    assert idx == 5
    new = set(G.cones) - set(F.cones)
    assert len(new) == 3 and all(5 in c for c in new)
    assert set(F.cones) - set(G.cones) == {frozenset({0, 2, 3})}


def test_subdivide_errors():
    F = Fan([(1, 0), (0, 1)], [{0, 1}])
    with pytest.raises(ValidationError):
        stellar_subdivide(F, (1, 0))
    with pytest.raises(ValidationError):
        stellar_subdivide(F, (-1, 1))


def test_support_preserved_on_samples():
    F, v = _sigma0()
    G, _ = stellar_subdivide(F, v[3])
    rng = random.Random(11)
    for _ in range(1000):
        p = tuple(Fraction(rng.randint(-40, 40), rng.randint(1, 9)) for _ in range(3))
        assert F.support_contains(p) == G.support_contains(p)


def test_fan_check_detects_overlap():
    bad = Fan([(1, 0), (0, 1), (1, 1)], [{0, 1}, {0, 2}])
    assert bad.check()


def test_unimodular_equivalence_certificate():
    Q = GradingMap.from_matrix(DELPEZZO_Q)
    P = gale_transform(Q).P
    U = unimodular_equivalence(P, DELPEZZO_P)
    prod = [[sum(U[i][k] * P[k][j] for k in range(3)) for j in range(5)] for i in range(3)]
    assert prod == DELPEZZO_P
    assert unimodular_equivalence(P, [[2 * x for x in r] for r in DELPEZZO_P]) is None


def test_primitive_columns_and_multiplicities():
    from bunchctl.cones import gale_from_matrix

    g = gale_from_matrix([[2, 0, 1], [0, 2, 1]])
    assert g.primitive_columns[0] == (1, 0) and g.multiplicities[0] == 2
    assert g.primitive_columns[2] == primitive((1, 1))
