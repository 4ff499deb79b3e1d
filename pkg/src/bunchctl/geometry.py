"""Geometric invariants of the variety ``X(R, F, Phi)`` read off a bunched ring."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ._linalg import in_span
from .bunch import fmt_face, moving_cone, pmap, projected_cone, weight_cone
from .cones import Cone, intersect_all
from .errors import UnsupportedError, ValidationError
from .groups import INFINITE, AbelianGroup, integer_kernel, sublattice_image, subgroup_intersect
from .polynomials import restrict_to_face


@dataclass(frozen=True)
class DivisorCones:
    eff: Cone
    mov: Cone
    samp: Cone
    ample: Cone  # closure of the ample cone, None if the ample cone is empty
    ample_is_open: bool = True

    def ample_contains(self, w, bunch):
        """Exact membership in the open ample cone ``∩ tau°``."""
        return all(t.rel_interior_contains(tuple(w)) for t in bunch)


def divisor_cones(B):
    Q = B.grading
    eff = weight_cone(Q)
    mov = moving_cone(Q)
    samp = intersect_all(B.bunch, B.k)
    p = samp.interior_point()
    ample = samp if all(t.rel_interior_contains(p) for t in B.bunch) else None
    return DivisorCones(eff, mov, samp, ample)


def _check_relevant(B, gamma0):
    gamma0 = frozenset(gamma0)
    if gamma0 not in B.rlv:
        raise ValidationError(f"face {fmt_face(gamma0)} is not relevant")
    return gamma0


def stratum_properties(B, gamma0, w):
    """(Cartier, Q-Cartier) for the class ``w`` along the stratum of ``gamma0``."""
    gamma0 = _check_relevant(B, gamma0)
    Q = B.grading
    S, _ = sublattice_image(Q, gamma0)
    cartier = S.contains(w)
    q_cartier = in_span([Q.free_column(i) for i in gamma0], tuple(w.free))
    return cartier, q_cartier


def picard_group(B):
    Q = B.grading
    S = subgroup_intersect([sublattice_image(Q, g)[0] for g in B.cov])
    return S, S.index()


def factoriality(B):
    """Per relevant face: (factorial, Q-factorial); plus global Q-factoriality."""
    Q = B.grading
    out = {}
    for g in B.rlv:
        _, idx = sublattice_image(Q, g)
        out[g] = (idx == 1, projected_cone(Q, g).dim == B.k)
    return out, all(t.dim == B.k for t in B.bunch)


def _binomial_system_solvable(binomials):
    """Whether ``c1 x^a + c2 x^b = 0`` (all of them) has a solution on the torus."""
    rows = []
    rhs = []
    for (e1, c1), (e2, c2) in binomials:
        rows.append([a - b for a, b in zip(e1, e2)])
        rhs.append(-c2 / c1)
    n = len(rows)
    # integer relations lambda with lambda^T U = 0; solvable iff prod b^lambda = 1 on a basis
    cols = len(rows[0]) if rows else 0
    Ut = [[rows[i][j] for i in range(n)] for j in range(cols)]
    for lam in integer_kernel(Ut, n) if Ut else [[int(i == j) for j in range(n)] for i in range(n)]:
        prod = Fraction(1)
        for l, b in zip(lam, rhs):
            prod *= Fraction(b) ** l
        if prod != 1:
            return False
    return True


def singular_points_on_stratum(pres, gamma0):
    """True/False whether the total coordinate space has singular points in the
    torus stratum of ``gamma0`` (coordinates nonzero exactly on ``gamma0``);
    None when the restricted equations are not monomials or binomials."""
    if len(pres.relations) > 1:
        raise UnsupportedError("smoothness analysis supports at most one relation")
    if pres.is_toric:
        return False
    f = pres.relation
    eqs = [f] + [f.derivative(i) for i in range(pres.nvars)]
    eqs = [restrict_to_face(g, gamma0) for g in eqs]
    eqs = [g for g in eqs if not g.is_zero()]
    if any(g.is_monomial() for g in eqs):
        return False
    if not eqs:
        return True
    if all(len(g) == 2 for g in eqs):
        keep = sorted(gamma0)
        binoms = []
        for g in eqs:
            (e1, c1), (e2, c2) = g.terms
            binoms.append((([e1[i] for i in keep], c1), ([e2[i] for i in keep], c2)))
        return _binomial_system_solvable(binoms)
    return None


def smoothness(B):
    """Per relevant face: True (smooth), False (singular) or None (undecided)."""
    fact, _ = factoriality(B)

    def one(g):
        if not fact[g][0]:
            return False
        sing = singular_points_on_stratum(B.pres, g)
        return None if sing is None else not sing

    return dict(zip(B.rlv, pmap(one, B.rlv)))


@dataclass(frozen=True)
class CanonicalData:
    canonical: object
    anticanonical: object
    q_gorenstein: bool
    gorenstein: bool
    q_fano: bool
    fano: bool


def dimension(B):
    return B.nvars - len(B.pres.relations) - B.k


def canonical_class(B):
    pres = B.pres
    Q = B.grading
    d = len(pres.relations)
    if d != B.nvars - B.k - dimension(B):
        raise ValidationError("relation count does not match the codimension")
    K = Q.target
    total = K.zero()
    for c in Q.columns:
        total = total + c
    canon = -total
    for g in pres.relations:
        canon = canon + Q.image(g.terms[0][0])
    anti = -canon
    a0 = anti.free
    q_gor = all(in_span(list(t.generators), a0) for t in B.bunch)
    pic, _ = picard_group(B)
    gor = pic.contains(anti)
    q_fano = all(t.rel_interior_contains(a0) for t in B.bunch)
    return CanonicalData(canon, anti, q_gor, gor, q_fano, q_fano and gor)


@dataclass(frozen=True)
class StratumInfo:
    face: frozenset
    local_class_lattice: object
    local_index: object
    is_factorial: bool
    is_q_factorial: bool
    is_smooth: object  # True, False or None (unknown)
    codim_in_orthant: int = 0
    description: str = ""


@dataclass
class VarietyReport:
    dimension: int
    class_group: AbelianGroup
    cones: DivisorCones
    picard: object
    picard_index: object
    canonical: CanonicalData
    q_factorial: bool
    combinatorially_minimal: bool
    projective: bool
    quasiprojective: bool
    rlv: tuple
    cov: tuple
    strata: list = field(default_factory=list)
    primality: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def non_factorial_strata(self):
        return [s.face for s in self.strata if not s.is_factorial]


def variety_report(B):
    cones = divisor_cones(B)
    pic, pidx = picard_group(B)
    fact, qfac = factoriality(B)
    smooth = smoothness(B)
    Q = B.grading
    r = B.nvars
    strata = []
    for g in B.rlv:
        S, idx = sublattice_image(Q, g)
        zero = [i for i in range(r) if i not in g]
        desc = (
            "points whose Cox coordinates vanish exactly at "
            + (fmt_face(zero) if zero else "no index")
        )
        strata.append(StratumInfo(g, S, idx, fact[g][0], fact[g][1], smooth[g], r - len(g), desc))
    zero_weight = any(not any(c.free) for c in Q.columns)
    notes = []
    prim = B.pres.primality_report()
    if prim["factorially_graded"].status != "verified":
        notes.append(f"factorial grading {prim['factorially_graded'].status}")
    if any(s.status != "verified" for s in prim["generators"]) or prim["relation"].status != "verified":
        notes.append("some primality hypotheses are attested or unknown")
    if any(v is None for v in smooth.values()):
        notes.append("smoothness undecided on some strata")
    return VarietyReport(
        dimension=dimension(B),
        class_group=Q.target,
        cones=cones,
        picard=pic,
        picard_index=pidx,
        canonical=canonical_class(B),
        q_factorial=qfac,
        combinatorially_minimal=cones.eff == cones.mov,
        projective=cones.eff.is_pointed and not zero_weight,
        quasiprojective=cones.ample is not None,
        rlv=tuple(B.rlv),
        cov=tuple(B.cov),
        strata=strata,
        primality=prim,
        notes=notes,
    )


__all__ = [
    "DivisorCones",
    "divisor_cones",
    "stratum_properties",
    "picard_group",
    "factoriality",
    "smoothness",
    "singular_points_on_stratum",
    "canonical_class",
    "CanonicalData",
    "StratumInfo",
    "VarietyReport",
    "variety_report",
    "dimension",
    "INFINITE",
]
