"""Stellar ambient modifications of bunched rings.

A blow-up subdivides the ambient fan at a lattice vector ``v_inf`` and adds
one Cox ring variable; a contraction removes the variable whose Gale column
``v_i`` is the subdividing vector of a stellar pair of chambers.  The Cox
ring relation is rewritten explicitly in both directions.

Variable indices are 0-based in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from ._linalg import primitive, solve
from .bunch import (
    BunchedRing,
    NO_MODEL,
    bunch_from_chamber,
    chamber_of_fan,
    default_ambient_chamber,
    git_cone,
    image_fan,
    moving_cone,
    orbit_cones,
    weight_cone,
)
from .cones import Cone, gale_from_matrix, gale_transform, intersect_all, stellar_subdivide
from .errors import InadmissibleError, ValidationError
from .groups import GradingMap, cokernel, grading_kernel, hermite_normal_form, lattice_basis
from .polynomials import (
    ATTESTED,
    UNKNOWN,
    VERIFIED,
    Attestations,
    CoxPresentation,
    GradedPoly,
    PrimalityStatus,
    aux_grading_decompose,
    irreducibility_certificate,
    quadratic_form_rank,
    restrict_to_face,
)


@dataclass(frozen=True)
class StellarData:
    """``m_inf * v_inf = sum a_i v_i`` over the rays ``v_i`` of the cone ``sigma0``."""

    sigma0: tuple
    v_inf: tuple
    a: tuple
    m_inf: int

    def check(self, rays):
        lhs = tuple(self.m_inf * x for x in self.v_inf)
        rhs = tuple(sum(ai * v[j] for ai, v in zip(self.a, rays)) for j in range(len(self.v_inf)))
        return lhs == rhs


def stellar_data(fan, v_inf):
    """Cone ``sigma0`` of ``fan`` containing ``v_inf`` in its relative interior, and the index."""
    v = tuple(v_inf)
    s0 = fan.minimal_cone_containing(v)
    if s0 is None:
        raise ValidationError(f"{v} lies outside the support of the fan")
    C = fan.cone(s0)
    if C.dim <= 1:
        raise ValidationError(f"{v} lies on a ray of the fan")
    if not C.is_simplicial or len(s0) != C.dim:
        raise ValidationError(f"the cone containing {v} is not simplicial")
    idx = sorted(s0)
    c = solve([fan.rays[i] for i in idx], v)
    if c is None or any(x <= 0 for x in c):
        raise ValidationError(f"{v} is not interior to a unique minimal cone")
    m = lcm(*(Fraction(x).denominator for x in c))
    a = [0] * len(fan.rays)
    for i, x in zip(idx, c):
        a[i] = int(x * m)
    sd = StellarData(tuple(idx), v, tuple(a), m)
    assert sd.check(fan.rays)
    return sd


@dataclass(frozen=True)
class AdmissibilityEvidence:
    admissible: bool
    meets_torus_orbit: bool
    k0: int
    g_k0: object
    primality: PrimalityStatus
    reason: str = ""


def _g_k0_primality(g, attested):
    reason = irreducibility_certificate(g)
    if reason:
        return PrimalityStatus(VERIFIED, reason)
    if len(g) == 1:
        return PrimalityStatus("reducible", "monomial")
    qr = quadratic_form_rank(g)
    if qr is not None and qr <= 2:
        return PrimalityStatus("reducible", f"quadratic form of rank {qr} splits into linear factors")
    if attested:
        return PrimalityStatus(ATTESTED, "K-prime by attestation")
    return PrimalityStatus(UNKNOWN, "no automatic check applies")


def check_admissible(f0, a, attested=False):
    """Admissibility of the relation ``f0`` for the auxiliary degrees ``a``."""
    a = tuple(a)
    outside = frozenset(i for i, x in enumerate(a) if x == 0)
    meets = len(restrict_to_face(f0, outside)) != 1
    parts = aux_grading_decompose(f0, a)
    k0, g = parts[0]
    status = _g_k0_primality(g, attested)
    if not meets:
        why = "the relation restricted to the toric orbit is a single monomial"
    elif g.is_monomial():
        why = f"g_k0 = {g} is a monomial"
    elif len(g.support()) < 2:
        why = f"g_k0 = {g} involves fewer than two variables"
    elif status.status not in (VERIFIED, ATTESTED):
        why = f"g_k0 = {g} not shown K-prime: {status.reason}"
    else:
        why = ""
    return AdmissibilityEvidence(not why, meets, k0, g, status, why)


def blowup_pullback(f0, sd):
    """``f0(T_inf^a_1 T_1, ...)/T_inf^k0`` with the new variable appended last."""
    parts = aux_grading_decompose(f0, sd.a)
    k0 = parts[0][0]
    terms = []
    for e, c in f0.terms:
        k = sum(x * y for x, y in zip(sd.a, e))
        terms.append((e + (k - k0,), c))
    return GradedPoly(f0.nvars + 1, terms), k0


def blowup_cox_relation(f0, sd):
    """The relation ``f1`` of the blown-up Cox ring and the shift ``k0``."""
    pulled, k0 = blowup_pullback(f0, sd)
    terms = []
    for e, c in pulled.terms:
        if e[-1] % sd.m_inf:
            raise InadmissibleError("admissibility hypotheses violated: exponent of T_inf not divisible by the index")
        terms.append((e[:-1] + (e[-1] // sd.m_inf,), c))
    return GradedPoly(f0.nvars + 1, terms), k0


def _canonical_free_rows(rows):
    if not rows:
        return rows
    H, _, _ = hermite_normal_form(rows, len(rows[0]))
    return H


def grading_from_kernel(P, r):
    """``Z^r / rowspace(P)`` as a grading map with a normalized free part."""
    R = [[row[j] for row in P] for j in range(r)]  # columns are the rows of P
    group, maps = cokernel(R, r) if P else cokernel([], r)
    k = group.rank
    free = _canonical_free_rows([list(m) for m in maps[:k]])
    tors = [list(m) for m in maps[k:]]
    return GradingMap.from_rows(free, tors, group.torsion_orders) if (free or tors) else GradingMap.from_rows([[0] * r])


def regrade(P_old, v_inf):
    """Append ``v_inf`` as a new column of ``P`` and return the induced grading."""
    P = [list(row) + [x] for row, x in zip(P_old, v_inf)]
    r = len(P[0])
    return grading_from_kernel(P, r), P


def exceptional_weights(B):
    """Indices ``i`` with ``w_i^0`` spanning an extremal ray of Eff alone."""
    Q = B.grading
    eff = weight_cone(Q)
    prim = [primitive(Q.free_column(i)) for i in range(Q.source_rank)]
    out = []
    for i, p in enumerate(prim):
        if not any(p) or p not in eff.rays:
            continue
        if sum(1 for q in prim if q == p) == 1:
            out.append(i)
    return out


@dataclass(frozen=True)
class Contraction:
    index: int
    lambda0: Cone
    lambda1: Cone
    eta0: Cone
    eta1: Cone


def _facet_between(c0, c1, k):
    meet = c0.intersection(c1)
    return meet if meet.dim == k - 1 else None


def find_contractions(B, eta1=None):
    """All exceptional weights admitting a contraction, with the chamber data."""
    k = B.k
    if any(t.dim != k for t in B.bunch):
        return []
    eff = weight_cone(B.grading)
    if not eff.is_pointed:
        return []
    ring = B.ring_chamber_fan
    toric = B.toric_chamber_fan
    lam1 = intersect_all(B.bunch, k)
    out = []
    for i in exceptional_weights(B):
        w = B.grading.free_column(i)
        lam0s = [c for c in ring.chambers if c != lam1 and c.contains(w) and _facet_between(c, lam1, k)]
        found = None
        for lam0 in sorted(lam0s, key=lambda c: c.key):
            wall = lam0.intersection(lam1)
            pairs = []
            for e0 in toric.chambers:
                if not e0 <= lam0:
                    continue
                f = _facet_between(e0, lam1, k)
                if f is None or not f <= wall:
                    continue
                for e1 in toric.chambers:
                    if e1 <= lam1 and f.is_face_of(e1) and (eta1 is None or e1 == eta1):
                        pairs.append((e0.key, e1.key, e0, e1))
            if pairs:
                _, _, e0, e1 = min(pairs, key=lambda t: (t[0], t[1]))
                found = Contraction(i, lam0, lam1, e0, e1)
                break
        if found is not None:
            out.append(found)
    return out


def contract_cox_relation(f1, sd, inf):
    """Push the relation down along the contraction of variable ``inf``.

    ``sd.a`` lists the coefficients of the remaining rays (entry ``inf`` is
    ignored).  Returns the relation in the other ``r - 1`` variables, order
    preserved, together with the K*-degree ``c`` of the lifted relation.
    """
    a = list(sd.a)
    a[inf] = 0
    m = sd.m_inf
    degs = set()
    for e, _ in f1.terms:
        degs.add(m * e[inf] - sum(x * y for x, y in zip(a, e)))
    if len(degs) != 1:
        raise ValidationError("lifted relation is not homogeneous for the contracted one-parameter group")
    c = degs.pop()
    if c > 0:
        raise ValidationError(f"lifted relation has positive degree {c}")
    terms = []
    for e, coeff in f1.terms:
        t_exp = m * e[inf] - c
        if t_exp != sum(x * y for x, y in zip(a, e)):
            raise ValidationError("rewrite in invariant variables leaves a residue")
        terms.append((e[:inf] + e[inf + 1:], coeff))
    return GradedPoly(f1.nvars - 1, terms), c


def _move_last_to(p, i):
    """Reorder variables so the last one lands at position ``i``."""
    n = p.nvars
    perm = list(range(n - 1))
    perm.insert(i, n - 1)
    return p.permuted(perm)


def same_up_to_unit(p, q):
    return p.nvars == q.nvars and p.monic() == q.monic()


# model states


@dataclass
class ModelState:
    """A bunched ring with the data of a neat embedding into a toric variety."""

    bunch: BunchedRing
    P: list
    eta: Cone

    @property
    def pres(self):
        return self.bunch.pres

    @property
    def gale(self):
        return gale_from_matrix(self.P, self.pres.nvars)

    @property
    def fan(self):
        return image_fan(self.pres.grading, self.eta, self.gale)

    @classmethod
    def initial(cls, B, P=None, eta=None):
        Q = B.grading
        if P is None:
            P = [list(row) for row in gale_transform(Q).P]
        else:
            P = [list(row) for row in P]
            if lattice_basis(P, Q.source_rank) != grading_kernel(Q):
                raise ValidationError("ambient matrix rows do not span the kernel of the grading")
        if eta is None:
            eta = default_ambient_chamber(B)
        return cls(B, P, eta)


@dataclass
class ModificationRecord:
    kind: str  # "blow_up", "contraction" or "small_transform"
    before: BunchedRing
    after: BunchedRing
    stellar: StellarData = None
    index: int = None
    exceptional_weight: object = None
    chambers: tuple = ()
    notes: dict = field(default_factory=dict)


def _normality(ev):
    """Normality of the new total coordinate space: certified through the admissibility route."""
    return "certified" if ev.primality.status in (VERIFIED, ATTESTED) else "assumed"


def _derived_attestations(n):
    return Attestations(frozenset(range(n)), True, True)


def _bunch_for_toric_chamber(pres, eta, max_vars):
    lam = git_cone(eta.interior_point(), orbit_cones(pres, max_vars=max_vars))
    return bunch_from_chamber(pres, lam, max_vars=max_vars)


def blow_up(state, v_inf, attest_prime=False):
    """Stellar subdivision of the ambient fan at ``v_inf`` and the new Cox ring."""
    B = state.bunch
    pres = B.pres
    r = pres.nvars
    fan = state.fan
    v = tuple(v_inf)
    if primitive(v) != v:
        raise ValidationError(f"{v} is not primitive")
    if any(m != 1 for m in state.gale.multiplicities):
        raise ValidationError("Gale columns must be primitive for stellar modifications")
    sd = stellar_data(fan, v)
    fan1, idx = stellar_subdivide(fan, v)
    if idx != r:
        raise ValidationError(f"{v} is already a column of the ambient matrix")
    Q1, P1 = regrade(state.P, v)
    notes = {"sigma0": sd.sigma0, "m_inf": sd.m_inf}
    if pres.is_toric:
        pres1 = CoxPresentation(Q1, [], pres.attestations)
    else:
        ev = check_admissible(pres.relation, sd.a, attest_prime)
        notes["admissibility"] = ev
        if not ev.admissible:
            raise InadmissibleError(f"relation is not admissible for this subdivision: {ev.reason}")
        pulled, _ = blowup_pullback(pres.relation, sd)
        f1, k0 = blowup_cox_relation(pres.relation, sd)
        notes.update(k0=k0, pullback=pulled, relation=f1)
        notes["normality"] = _normality(ev)
        pres1 = CoxPresentation(Q1, [f1], _derived_attestations(r + 1))
    gale1 = gale_from_matrix(P1, r + 1)
    eta1 = chamber_of_fan(Q1, fan1, gale1)
    if image_fan(Q1, eta1, gale1) != fan1:
        raise ValidationError("subdivided fan is not the image fan of a chamber")
    B1 = _bunch_for_toric_chamber(pres1, eta1, B.max_vars)
    exc = exceptional_weights(B1)
    notes["new_weight_exceptional"] = r in exc
    rec = ModificationRecord(
        "blow_up", B, B1, stellar=sd, index=r, exceptional_weight=Q1.columns[r], notes=notes
    )
    return ModelState(B1, P1, eta1), rec


def contract(state, i, attest_prime=False):
    """Contract the divisor of variable ``i``; returns the new state and record."""
    B = state.bunch
    pres = B.pres
    Q = pres.grading
    r = pres.nvars
    gale = state.gale
    cur = state.eta
    options = [c for c in find_contractions(B, eta1=cur) if c.index == i]
    if not options:
        options = [c for c in find_contractions(B) if c.index == i]
    if not options:
        raise ValidationError(f"weight w{i + 1} admits no contraction for this model")
    ct = options[0]
    fan0 = image_fan(Q, ct.eta0, gale)
    fan1 = image_fan(Q, ct.eta1, gale)
    v = gale.primitive_columns[i]
    sub, idx = stellar_subdivide(fan0, v)
    if sub != fan1 or idx != i:
        raise ValidationError("chamber pair does not define a stellar subdivision")
    sd = stellar_data(fan0, v)
    keep = [j for j in range(r) if j != i]
    P0 = [[row[j] for j in keep] for row in state.P]
    Q0 = grading_from_kernel(P0, r - 1)
    sd0 = StellarData(
        tuple(keep.index(j) for j in sd.sigma0), sd.v_inf, tuple(sd.a[j] for j in keep), sd.m_inf
    )
    notes = {"sigma0": sd.sigma0, "m_inf": sd.m_inf}
    if pres.is_toric:
        pres0 = CoxPresentation(Q0, [], pres.attestations)
    else:
        f0, c = contract_cox_relation(pres.relation, sd, i)
        ev = check_admissible(f0, sd0.a, attest_prime)
        notes.update(c=c, relation=f0, admissibility=ev)
        notes["normality"] = _normality(ev)
        if not ev.admissible:
            raise InadmissibleError(f"contracted relation is not admissible: {ev.reason}")
        back, _ = blowup_cox_relation(f0, sd0)
        if not same_up_to_unit(_move_last_to(back, i), pres.relation):
            raise ValidationError("blowing up the contracted relation does not give the original one")
        notes["round_trip"] = True
        pres0 = CoxPresentation(Q0, [f0], _derived_attestations(r - 1))
    fan0r = fan0.relabeled(keep)
    gale0 = gale_from_matrix(P0, r - 1)
    eta0 = chamber_of_fan(Q0, fan0r, gale0)
    B0 = _bunch_for_toric_chamber(pres0, eta0, B.max_vars)
    rec = ModificationRecord(
        "contraction",
        B,
        B0,
        stellar=sd,
        index=i,
        exceptional_weight=Q.columns[i],
        chambers=(ct.lambda0, ct.lambda1, ct.eta0, ct.eta1),
        notes=notes,
    )
    return ModelState(B0, P0, eta0), rec


def small_transform(B, lam_new):
    """The model with the same Cox ring whose semiample cone is ``lam_new``."""
    if not lam_new <= moving_cone(B.grading):
        raise ValidationError(NO_MODEL)
    return bunch_from_chamber(B.pres, lam_new, max_vars=B.max_vars)


def _transform_target(B, i):
    """A chamber inside Mov sharing a facet with a chamber that contains ``w_i``."""
    k = B.k
    ring = B.ring_chamber_fan
    mov = moving_cone(B.grading)
    w = B.grading.free_column(i)
    inside = [c for c in ring.chambers if c <= mov]
    cands = []
    for lam in inside:
        for lam0 in ring.chambers:
            if lam0 != lam and lam0.contains(w) and _facet_between(lam0, lam, k):
                cands.append(lam)
                break
    return min(cands, key=lambda c: c.key) if cands else None


@dataclass
class Reduction:
    records: list
    final: ModelState
    minimal: bool
    diagnostic: str = ""


def reduce_to_minimal(B, targets=None, state=None):
    """Contract exceptional weights until Eff equals Mov.

    Direct contractions are preferred (smallest variable index first); when
    none exists the model is first moved by a small transformation so that a
    contraction becomes available.  ``targets`` restricts the first step to
    the given variable indices.
    """
    state = state or ModelState.initial(B)
    records = []
    first = True
    for _ in range(B.nvars + 1):
        Bc = state.bunch
        if weight_cone(Bc.grading) == moving_cone(Bc.grading):
            return Reduction(records, state, True)
        exc = exceptional_weights(Bc)
        if first and targets is not None:
            exc = [i for i in exc if i in set(targets)]
        first = False
        if not exc:
            return Reduction(records, state, False, "no exceptional weight to contract")
        direct = sorted(c.index for c in find_contractions(Bc) if c.index in exc)
        if direct:
            i = direct[0]
        else:
            i = exc[0]
            lam = _transform_target(Bc, i)
            if lam is None:
                return Reduction(records, state, False, f"no admissible chamber geometry for w{i + 1}")
            B2 = small_transform(Bc, lam)
            records.append(ModificationRecord("small_transform", Bc, B2, index=i, chambers=(intersect_all(Bc.bunch, Bc.k), lam)))
            state = ModelState(B2, state.P, default_ambient_chamber(B2))
            Bc = B2
        try:
            state, rec = contract(state, i)
        except (InadmissibleError, ValidationError) as e:
            return Reduction(records, state, False, f"contraction of w{i + 1} failed: {e}")
        records.append(rec)
    return Reduction(records, state, False, "step limit reached")
