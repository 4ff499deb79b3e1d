import itertools
import random
from functools import reduce
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bunchctl.bunch import BunchedRing, git_cone
from bunchctl.cones import Cone
from bunchctl.errors import ValidationError
from bunchctl.geometry import (
    canonical_class,
    dimension,
    divisor_cones,
    factoriality,
    picard_group,
    singular_points_on_stratum,
    smoothness,
    stratum_properties,
    variety_report,
)
from bunchctl.groups import GradingMap, sublattice_image
from bunchctl.modify import ModelState, blow_up
from bunchctl.polynomials import Attestations, CoxPresentation, GradedPoly

from conftest import DELPEZZO_P, DELPEZZO_Q, delpezzo_ring, wcone
from oracles import GRID


def F(*idx):
    return frozenset(i - 1 for i in idx)


def grid_singular_point(f, nvars, support):
    """Search the grid for a point with support exactly ``support`` where f and all
    partial derivatives vanish."""
    support = sorted(support)
    grid = GRID if len(support) <= 4 else GRID[:4]
    eqs = [f] + [f.derivative(i) for i in range(nvars)]
    for vals in itertools.product(grid, repeat=len(support)):
        x = [0] * nvars
        for j, v in zip(support, vals):
            x[j] = v
        if all(abs(complex(g.evaluate(x))) == 0 for g in eqs):
            return True
    return False


# divisor cones


def test_divisor_cones_delpezzo(delpezzo):
    c = divisor_cones(delpezzo)
    assert c.eff == wcone(4, 1)
    assert c.mov == wcone(2, 5)
    assert c.samp == wcone(2, 5) and c.ample == wcone(2, 5)


def test_cone_chain(delpezzo, torsion, p2):
    for B in (delpezzo, torsion, p2):
        c = divisor_cones(B)
        assert c.samp <= c.mov <= c.eff
        if c.ample is not None:
            assert c.ample <= c.samp


# local class groups and Picard group


def test_stratum_properties(delpezzo):
    K = delpezzo.grading.target
    assert stratum_properties(delpezzo, F(2, 5), K.element((0, 1))) == (False, True)
    assert stratum_properties(delpezzo, F(2, 5), K.element((1, 2))) == (True, True)
    assert stratum_properties(delpezzo, F(1, 4), K.element((0, 1))) == (True, True)
    with pytest.raises(ValidationError, match="not relevant"):
        stratum_properties(delpezzo, F(3), K.element((0, 1)))


def test_picard_groups(delpezzo, torsion, p2):
    S, idx = picard_group(delpezzo)
    assert idx == 3 and S.contains(delpezzo.grading.target.element((0, 3)))
    assert not S.contains(delpezzo.grading.target.element((0, 1)))
    assert picard_group(torsion)[1] == 9
    assert picard_group(p2)[1] == 1


def test_picard_inside_every_local_lattice(delpezzo, torsion):
    for B in (delpezzo, torsion):
        pic, _ = picard_group(B)
        for g in B.rlv:
            assert pic.is_subgroup_of(sublattice_image(B.grading, g)[0])


# singularities


def test_factoriality_delpezzo(delpezzo):
    fact, qfact = factoriality(delpezzo)
    assert qfact
    assert {g for g, (f, _) in fact.items() if not f} == {F(2, 5)}


def test_factoriality_torsion(torsion):
    fact, qfact = factoriality(torsion)
    assert qfact
    assert fact[F(1, 3, 5)] == (False, True)
    assert fact[F(1, 4)] == (True, True)
    assert F(1, 2) not in fact  # T1*T2 alone is a monomial: not an F-face


def test_smoothness_delpezzo(delpezzo):
    sm = smoothness(delpezzo)
    assert sm[F(2, 5)] is False
    assert all(v is True for g, v in sm.items() if g != F(2, 5))


def test_singular_points_agree_with_grid_search(delpezzo, torsion):
    for B in (delpezzo, torsion):
        f = B.pres.relation
        for g in B.rlv:
            ours = singular_points_on_stratum(B.pres, g)
            assert ours is not None
            assert ours == grid_singular_point(f, B.nvars, g), g


def test_undecided_stratum_reports_none():
    # every restricted equation keeps at least two terms and f keeps three
    Q = GradingMap.from_matrix([[1, 1, 1]])
    f = GradedPoly.parse("T1^2*T2 + T2^2*T3 + T3^2*T1", 3)
    pres = CoxPresentation(Q, [f])
    assert singular_points_on_stratum(pres, range(3)) is None
    # a monomial derivative settles the question
    g = GradedPoly.parse("T1^3 + T2^3 + T1*T3^2", 3)  # d/dT3 = 2*T1*T3
    assert singular_points_on_stratum(CoxPresentation(Q, [g]), range(3)) is False


def test_resolution_end_state_is_smooth():
    B = delpezzo_ring()
    st = ModelState.initial(B, DELPEZZO_P)
    st, _ = blow_up(st, (0, -1, -1), False)
    st, _ = blow_up(st, (1, -1, -1), False)
    sm = smoothness(st.bunch)
    assert all(v is True for v in sm.values()), sm
    assert variety_report(st.bunch).picard_index == 1


# canonical class


def test_canonical_classes(delpezzo, torsion, p2):
    c = canonical_class(delpezzo)
    assert c.canonical.free == (0, -3)
    assert (c.q_gorenstein, c.gorenstein, c.q_fano, c.fano) == (True, True, True, True)
    c = canonical_class(torsion)
    assert c.canonical.vector == (-4, 0)
    assert (c.q_gorenstein, c.gorenstein, c.q_fano, c.fano) == (True, False, True, False)
    assert canonical_class(p2).canonical.free == (-3,)


def test_canonical_class_permutation_invariant():
    rng = random.Random(2)
    base = canonical_class(delpezzo_ring()).canonical
    for _ in range(5):
        perm = list(range(5))
        rng.shuffle(perm)
        Q = GradingMap.from_matrix([[row[p] for p in perm] for row in DELPEZZO_Q])
        # variable i of the new ring is variable perm[i] of the old one
        f = delpezzo_ring().pres.relation.permuted(perm)
        B = BunchedRing(CoxPresentation(Q, [f], Attestations(factorially_graded=True)), [wcone(2, 5)])
        assert canonical_class(B).canonical == base


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=2, max_size=5))
def test_weighted_projective_invariants(ws):
    # drop-one admissibility needs gcd of any r-1 weights to be 1
    if any(reduce(gcd, ws[:i] + ws[i + 1:]) != 1 for i in range(len(ws))):
        return
    B = BunchedRing(CoxPresentation(GradingMap.from_matrix([ws])), [Cone([(1,)])])
    R = variety_report(B)
    assert R.dimension == len(ws) - 1 == dimension(B)
    assert R.canonical.canonical.free == (-sum(ws),)
    # a Cartier class is Q-Cartier; fano implies q_fano and gorenstein
    if R.canonical.fano:
        assert R.canonical.q_fano and R.canonical.gorenstein
    if R.canonical.gorenstein:
        assert R.canonical.q_gorenstein
    # Pic of a weighted projective space has index lcm of the weights
    lcm = reduce(lambda a, b: a * b // gcd(a, b), ws)
    assert R.picard_index == lcm
    assert all(s.is_smooth is (s.local_index == 1) for s in R.strata)


def test_report_flags(delpezzo, torsion):
    R = variety_report(delpezzo)
    assert R.dimension == 2 and str(R.class_group) == "Z^2"
    assert R.q_factorial and R.projective and not R.combinatorially_minimal
    assert R.primality["relation"].status == "verified"
    R = variety_report(torsion)
    assert R.dimension == 4 and str(R.class_group) == "Z + Z/3"
    assert R.combinatorially_minimal


def test_git_cone_of_anticanonical_is_ample_chamber(delpezzo):
    anti = canonical_class(delpezzo).anticanonical
    assert git_cone(anti, delpezzo.orbit_cone_set) == divisor_cones(delpezzo).samp
