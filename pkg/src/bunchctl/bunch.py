"""Bunched rings: validation, relevant faces, orbit cones and GIT fans.

Faces of the positive orthant are frozensets of 0-based variable indices.
Cones in ``K^0_Q`` are :class:`~bunchctl.cones.Cone` objects built from the
free parts of the weights.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from ._linalg import dot, sign_normalized
from .cones import Cone, Fan, face_correspondence, gale_transform, intersect_all
from .errors import SizeLimitError, ValidationError
from .groups import sublattice_image
from .polynomials import is_f_face

DEFAULT_MAX_VARS = 20


def _threads():
    try:
        return max(1, int(os.environ.get("BUNCHCTL_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Map preserving input order; uses a thread pool when BUNCHCTL_THREADS > 1."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class Check:
    """Outcome of a validation with human readable diagnostics."""

    ok: bool
    diagnostics: tuple = ()

    def __bool__(self):
        return self.ok


def fmt_face(gamma0):
    return "{" + ",".join(str(i + 1) for i in sorted(gamma0)) + "}"


def projected_cone(Q, gamma0):
    """``Q^0(gamma_0)``: the cone over the free parts of the weights in ``gamma_0``."""
    return Cone([Q.free_column(i) for i in sorted(gamma0)], Q.target.rank)


def weight_cone(Q):
    return projected_cone(Q, range(Q.source_rank))


def _free_point(w, k):
    if hasattr(w, "free"):
        return tuple(w.free)
    w = tuple(w)
    if len(w) != k:
        raise ValidationError(f"point {w} is not in a space of dimension {k}")
    return w


def all_faces(r):
    for size in range(r + 1):
        for c in combinations(range(r), size):
            yield frozenset(c)


def validate_admissible(pres):
    """Each facet of the orthant must map onto K."""
    Q = pres.grading
    r = Q.source_rank
    diags = []
    for i in range(r):
        _, idx = sublattice_image(Q, [j for j in range(r) if j != i])
        if idx != 1:
            shown = "infinite" if idx == float("inf") else idx
            diags.append(f"weights without w{i + 1} generate a subgroup of index {shown}")
    return Check(not diags, tuple(diags))


@dataclass(frozen=True)
class OrbitConeSet:
    """Faces ``gamma_0`` with their cones ``Q^0(gamma_0)``; ``toric`` means all faces are used."""

    faces: tuple  # ((gamma0, Cone), ...) in face enumeration order
    ambient_dim: int
    toric: bool

    @cached_property
    def cones(self):
        return tuple(sorted({c for _, c in self.faces}))

    @cached_property
    def by_face(self):
        return dict(self.faces)

    @cached_property
    def weight_cone(self):
        """The cone spanned by all orbit cones."""
        return Cone([g for c in self.cones for g in c.generators], self.ambient_dim)

    def containing(self, w):
        return [c for c in self.cones if c.contains(w)]


def f_faces(pres, max_vars=DEFAULT_MAX_VARS):
    r = pres.nvars
    if r > max_vars:
        raise SizeLimitError(f"{r} variables exceed the face enumeration bound {max_vars}")
    return [g for g in all_faces(r) if is_f_face(pres, g)]


def orbit_cones(pres, toric=False, max_vars=DEFAULT_MAX_VARS):
    """Cones ``Q^0(gamma_0)`` over F-faces (or over all faces when ``toric``)."""
    r = pres.nvars
    if r > max_vars:
        raise SizeLimitError(f"{r} variables exceed the face enumeration bound {max_vars}")
    Q = pres.grading
    faces = list(all_faces(r)) if toric or pres.is_toric else f_faces(pres, max_vars)
    cones = pmap(lambda g: projected_cone(Q, g), faces)
    return OrbitConeSet(tuple(zip(faces, cones)), Q.target.rank, toric or pres.is_toric)


def git_cone(w, S):
    """Intersection of all orbit cones containing ``w^0``."""
    w = _free_point(w, S.ambient_dim)
    containing = S.containing(w)
    full = Cone([g for c in S.cones for g in c.generators], S.ambient_dim)
    if not full.contains(w) or not containing:
        raise ValidationError(f"{w} lies outside the weight cone")
    return intersect_all(containing, S.ambient_dim)


@dataclass(frozen=True)
class ChamberFan:
    ambient_dim: int
    chambers: tuple
    source: str  # "toric" or "hypersurface"
    support: Cone

    def __len__(self):
        return len(self.chambers)

    def chambers_containing(self, w):
        return [c for c in self.chambers if c.contains(tuple(w))]

    def chamber_of_interior_point(self, w):
        hits = [c for c in self.chambers if c.rel_interior_contains(tuple(w))]
        return hits[0] if len(hits) == 1 else None

    def adjacent(self, c1, c2):
        """Whether two full-dimensional chambers share a facet."""
        meet = c1.intersection(c2)
        return meet.dim == self.ambient_dim - 1


def _split(cell, h):
    vals = [dot(h, r) for r in cell.rays]
    if not any(v > 0 for v in vals) or not any(v < 0 for v in vals):
        return [cell]
    hneg = tuple(-x for x in h)
    return [
        Cone.from_inequalities(cell.facets + (h,), cell.equations, cell.ambient_dim),
        Cone.from_inequalities(cell.facets + (hneg,), cell.equations, cell.ambient_dim),
    ]


def _weight_cone_checked(S):
    k = S.ambient_dim
    W = Cone([g for c in S.cones for g in c.generators], k)
    if not W.is_pointed:
        raise ValidationError("weight cone is not pointed; only the projective case is supported")
    if W.dim != k:
        raise ValidationError("weight cone is not full-dimensional")
    return W


def _lex_nonnegative(vals):
    for v in vals:
        if v:
            return v > 0
    return True


def _chamber_near(S, point, first=None):
    """Chamber containing ``point + t*first + t^2 e_1 + t^3 e_2 + ...`` for small ``t > 0``.

    The perturbed point avoids every wall, so the cones containing it are
    decided by the sign pattern of the tight facet normals alone.  Returns
    the set of orbit cones containing it (None if it leaves the weight cone).
    """
    hits = []
    for c in S.cones:
        if not c.is_full_dim or not c.contains(point):
            continue
        ok = True
        for h in c.facets:
            if dot(h, point) == 0:
                head = [dot(h, first)] if first is not None else []
                if not _lex_nonnegative(head + list(h)):
                    ok = False
                    break
        if ok:
            hits.append(c)
    return frozenset(hits) or None


def enumerate_chamber_fan(S):
    """Full-dimensional GIT chambers, found by walking across chamber facets.

    Starting from the chamber at a perturbed interior point of the weight
    cone, every facet is crossed at a perturbed relative interior point; the
    orbit cones containing that point determine the neighbouring chamber.
    """
    k = S.ambient_dim
    W = _weight_cone_checked(S)
    start = _chamber_near(S, W.interior_point())
    found = {}
    todo = [start]
    while todo:
        key = todo.pop()
        if key in found:
            continue
        lam = intersect_all(key, k)
        found[key] = lam
        for h in lam.facets:
            rays = [r for r in lam.rays if dot(h, r) == 0]
            f = tuple(sum(col) for col in zip(*rays)) if rays else (0,) * k
            nxt = _chamber_near(S, f, tuple(-x for x in h))
            if nxt is not None and nxt not in found:
                todo.append(nxt)
    chambers = sorted(set(found.values()))
    return ChamberFan(k, tuple(chambers), "toric" if S.toric else "hypersurface", W)


def chambers_by_arrangement(S):
    """Same chambers via cells of the arrangement of all orbit cone walls.

    Exhaustive and much slower than :func:`enumerate_chamber_fan`; kept as an
    independent cross-check for small inputs.
    """
    k = S.ambient_dim
    W = _weight_cone_checked(S)
    walls = set()
    for c in S.cones:
        for h in c.facets + c.equations:
            if any(h):
                walls.add(sign_normalized(h))
    cells = [W]
    for h in sorted(walls):
        cells = [part for cell in cells for part in _split(cell, h)]
    cells = [c for c in cells if c.dim == k]
    cache = {}
    for cell in cells:
        key = frozenset(S.containing(cell.interior_point()))
        if key not in cache:
            cache[key] = intersect_all(key, k)
    chambers = sorted(set(cache.values()))
    return ChamberFan(k, tuple(chambers), "toric" if S.toric else "hypersurface", W)


def chamber_fan(pres, toric=False, max_vars=DEFAULT_MAX_VARS):
    return enumerate_chamber_fan(orbit_cones(pres, toric=toric, max_vars=max_vars))


def moving_cone(Q):
    r = Q.source_rank
    return intersect_all([projected_cone(Q, [j for j in range(r) if j != i]) for i in range(r)], Q.target.rank)


class BunchedRing:
    """A Cox presentation together with an F-bunch ``Phi`` of cones in ``K^0_Q``."""

    def __init__(self, pres, bunch, validate=True, max_vars=DEFAULT_MAX_VARS):
        self.pres = pres
        self.max_vars = max_vars
        self.bunch = tuple(sorted(set(bunch)))
        if validate:
            adm = validate_admissible(pres)
            if not adm:
                raise ValidationError("generator system is not admissible", adm.diagnostics)
            chk = validate_bunch(self)
            if not chk:
                raise ValidationError("not an F-bunch", chk.diagnostics)

    @classmethod
    def from_chamber_point(cls, pres, w, max_vars=DEFAULT_MAX_VARS):
        S = orbit_cones(pres, max_vars=max_vars)
        lam = git_cone(w, S)
        return bunch_from_chamber(pres, lam, max_vars=max_vars)

    @property
    def grading(self):
        return self.pres.grading

    @property
    def nvars(self):
        return self.pres.nvars

    @property
    def k(self):
        return self.grading.target.rank

    @cached_property
    def orbit_cone_set(self):
        return orbit_cones(self.pres, max_vars=self.max_vars)

    @cached_property
    def toric_orbit_cone_set(self):
        return orbit_cones(self.pres, toric=True, max_vars=self.max_vars)

    @cached_property
    def ring_chamber_fan(self):
        """The GIT fan of the total coordinate space."""
        return enumerate_chamber_fan(self.orbit_cone_set)

    @cached_property
    def toric_chamber_fan(self):
        """The GIT fan of the ambient affine space."""
        return enumerate_chamber_fan(self.toric_orbit_cone_set)

    @cached_property
    def _relevant(self):
        rlv = []
        for g, c in self.orbit_cone_set.faces:
            if any(tau.relint_subset(c) for tau in self.bunch):
                rlv.append(g)
        cov = [g for g in rlv if not any(h < g for h in rlv)]
        return tuple(rlv), tuple(cov)

    @property
    def rlv(self):
        return self._relevant[0]

    @property
    def cov(self):
        return self._relevant[1]

    def __eq__(self, other):
        return isinstance(other, BunchedRing) and self.pres == other.pres and self.bunch == other.bunch

    def __hash__(self):
        return hash((self.pres, self.bunch))

    def __repr__(self):
        return f"BunchedRing({self.pres!r}, bunch={list(self.bunch)})"


def validate_bunch(B):
    """Check both F-bunch conditions; raises if a cone is not a projected F-face."""
    S = B.orbit_cone_set
    projected = set(S.cones)
    Phi = list(B.bunch)
    diags = []
    if not Phi:
        return Check(False, ("the bunch is empty",))
    for tau in Phi:
        if tau.ambient_dim != B.k:
            raise ValidationError(f"bunch cone {tau} does not live in K^0_Q of dimension {B.k}")
        if tau not in projected:
            raise ValidationError(f"{tau} is not a projected F-face")
    for tau, sigma in combinations(Phi, 2):
        if not tau.relint_meets(sigma):
            diags.append(f"relative interiors of {tau} and {sigma} are disjoint")
        elif sigma.relint_subset(tau) or tau.relint_subset(sigma):
            diags.append(f"relative interior of one of {tau}, {sigma} contains the other")
    for omega in sorted(projected - set(Phi)):
        if all(omega.relint_meets(s) and not s.relint_subset(omega) for s in Phi):
            diags.append(f"projected F-face {omega} could be added (bunch not maximal)")
    Q = B.grading
    r = Q.source_rank
    for i in range(r):
        facet = projected_cone(Q, [j for j in range(r) if j != i])
        if not any(tau.relint_subset(facet) for tau in Phi):
            diags.append(f"no bunch cone has its relative interior inside that of the facet without w{i + 1}")
    return Check(not diags, tuple(diags))


def relevant_faces(B):
    return list(B.rlv), list(B.cov)


NO_MODEL = "no Q-factorial projective model for this chamber"


def bunch_from_chamber(pres, lam, max_vars=DEFAULT_MAX_VARS):
    """The bunch of minimal orbit cones whose relative interior contains ``lam°``."""
    S = orbit_cones(pres, max_vars=max_vars)
    k = S.ambient_dim
    if lam.dim != k:
        raise ValidationError(f"{lam} is not full-dimensional")
    p = lam.interior_point()
    if git_cone(p, S) != lam:
        raise ValidationError(f"{lam} is not a chamber of the GIT fan")
    Q = pres.grading
    r = Q.source_rank
    for i in range(r):
        if not projected_cone(Q, [j for j in range(r) if j != i]).rel_interior_contains(p):
            raise ValidationError(NO_MODEL)
    psi = [w for w in S.cones if lam.relint_subset(w)]
    phi = [w for w in psi if not any(u != w and u <= w for u in psi)]
    return BunchedRing(pres, phi, max_vars=max_vars)


def image_fan(Q, eta, gale=None):
    """Fan with maximal cones ``P(gamma_0^*)`` for the minimal faces with ``eta° ⊆ Q^0(gamma_0)°``."""
    gale = gale or gale_transform(Q)
    if gale.degenerate:
        raise ValidationError("grading has no kernel; the ambient fan lives in a zero lattice")
    if any(not any(v) for v in gale.columns):
        raise ValidationError("a Gale column vanishes")
    r = Q.source_rank
    faces = [g for g in all_faces(r) if eta.relint_subset(projected_cone(Q, g))]
    minimal = [g for g in faces if not any(h < g for h in faces)]
    cones = [face_correspondence(g, r) for g in minimal]
    return Fan(gale.primitive_columns, cones)


def ample_contains_relint(B, eta):
    """Whether ``eta° ⊆ Ample``, that is ``eta ⊆ tau`` and ``eta° ⊆ tau°`` for all bunch cones."""
    return all(eta.relint_subset(tau) for tau in B.bunch)


def toric_chambers(B):
    return B.toric_chamber_fan


def default_ambient_chamber(B):
    """Lexicographically smallest chamber of the toric GIT fan inside the ample cone."""
    cands = [c for c in toric_chambers(B).chambers if ample_contains_relint(B, c)]
    if not cands:
        samp = intersect_all(B.bunch, B.k)
        return git_cone(samp.interior_point(), B.toric_orbit_cone_set)
    return min(cands, key=lambda c: c.key)


def ambient_fan(B, eta=None):
    """The fan of the minimal toric ambient variety defined by the toric chamber ``eta``."""
    if eta is None:
        eta = default_ambient_chamber(B)
    S = B.toric_orbit_cone_set
    if git_cone(eta.interior_point(), S) != eta:
        raise ValidationError(f"{eta} is not a cone of the toric GIT fan")
    if not ample_contains_relint(B, eta):
        raise ValidationError(f"{eta} does not have its relative interior in the ample cone")
    return image_fan(B.grading, eta)


def chamber_of_fan(Q, fan, gale=None):
    """Inverse of :func:`image_fan`: the cone ``eta`` cut out by the maximal cones."""
    r = Q.source_rank
    gale = gale or gale_transform(Q)
    if tuple(fan.rays) != tuple(gale.primitive_columns):
        raise ValidationError("fan rays do not match the Gale transform columns")
    return intersect_all([projected_cone(Q, face_correspondence(c, r)) for c in fan.cones], Q.target.rank)
