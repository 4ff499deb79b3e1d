"""Exact rational polyhedral cones and fans.

Cones are generated by integer vectors.  Both representations are computed
exactly with the double description method on Python integers:

* the facet (H-) representation is the set of extreme rays of the dual cone,
  with the equations spanning the orthogonal complement of the linear span;
* the generator (V-) representation is the set of extreme rays modulo the
  lineality space.

Canonical forms (rays projected orthogonally to the lineality space, lines
in reduced echelon form) make cones hashable so they can be deduplicated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from ._linalg import (
    det,
    dot,
    integral,
    primitive,
    project_out,
    rank,
    rref,
    solve,
)
from .errors import ValidationError
from .groups import grading_kernel


def _combine(s, x, c, y):
    return primitive(tuple(s * a - c * b for a, b in zip(x, y)))


def double_description(inequalities, n):
    """Extreme rays and a line basis of ``{x in Q^n : a . x >= 0}``.

    Incremental double description with the combinatorial adjacency test.
    Lines stay orthogonal to every processed inequality, so the rays always
    span a pointed cone modulo the lineality space.
    """
    lines = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    rays = []  # (vector, frozenset of tight inequality indices)
    seen = []
    for j, a in enumerate(inequalities):
        a = tuple(a)
        if not any(a):
            continue
        pick = next((i for i, l in enumerate(lines) if dot(a, l)), None)
        if pick is not None:
            l = lines.pop(pick)
            s = dot(a, l)
            if s < 0:
                l = tuple(-x for x in l)
                s = -s
            lines = [_combine(s, l2, dot(a, l2), l) for l2 in lines]
            rays = [(_combine(s, r, dot(a, r), l), t | {j}) for r, t in rays]
            rays.append((l, frozenset(seen)))
        else:
            vals = [dot(a, r) for r, _ in rays]
            new = []
            pos, neg = [], []
            for k, ((r, t), v) in enumerate(zip(rays, vals)):
                if v > 0:
                    new.append((r, t))
                    pos.append(k)
                elif v == 0:
                    new.append((r, t | {j}))
                else:
                    neg.append(k)
            for p in pos:
                rp, tp = rays[p]
                for q in neg:
                    rq, tq = rays[q]
                    common = tp & tq
                    if any(common <= t for k, (_, t) in enumerate(rays) if k != p and k != q):
                        continue
                    new.append((_combine(vals[p], rq, vals[q], rp), common | {j}))
            rays = new
        seen.append(j)
    return [r for r, _ in rays], lines


def _as_int_vector(v):
    if all(isinstance(x, int) for x in v):
        return tuple(v)
    return integral(v)


def _canonical_lines(lines, n):
    if not lines:
        return ()
    R, _ = rref([list(l) for l in lines], n)
    return tuple(integral(row) for row in R)


class Cone:
    """Rational polyhedral cone ``cone(generators)`` in ``Q^n``."""

    def __init__(self, generators=(), ambient_dim=None):
        gens = [_as_int_vector(tuple(g)) for g in generators]
        if ambient_dim is None:
            if not gens:
                raise ValidationError("ambient dimension needed for the zero cone")
            ambient_dim = len(gens[0])
        if any(len(g) != ambient_dim for g in gens):
            raise ValidationError("generators of different lengths")
        self.ambient_dim = ambient_dim
        self._gens = tuple(sorted({primitive(g) for g in gens if any(g)}))

    @classmethod
    def from_inequalities(cls, inequalities, equations=(), ambient_dim=None):
        ineqs = [tuple(a) for a in inequalities]
        eqs = [tuple(e) for e in equations]
        n = ambient_dim if ambient_dim is not None else len((ineqs + eqs)[0])
        allq = ineqs + eqs + [tuple(-x for x in e) for e in eqs]
        rays, lines = double_description(allq, n)
        c = cls(rays + lines + [tuple(-x for x in l) for l in lines], n)
        c.__dict__["_vrep"] = (rays, lines)
        return c

    @classmethod
    def orthant(cls, n):
        return cls([tuple(int(i == j) for j in range(n)) for i in range(n)], n)

    # representations

    @cached_property
    def _hrep(self):
        rays, lines = double_description(self._gens, self.ambient_dim)
        return rays, lines

    @cached_property
    def _vrep(self):
        facets, eqs = self._hrep
        allq = list(facets) + list(eqs) + [tuple(-x for x in e) for e in eqs]
        return double_description(allq, self.ambient_dim)

    @cached_property
    def lines(self):
        """Canonical basis of the lineality space."""
        return _canonical_lines(self._vrep[1], self.ambient_dim)

    @cached_property
    def rays(self):
        """Extreme rays, projected orthogonally to the lineality space."""
        lines = self.lines
        return tuple(sorted({primitive(project_out(r, lines)) for r in self._vrep[0]}))

    @cached_property
    def equations(self):
        """Canonical basis of the orthogonal complement of the linear span."""
        return _canonical_lines(self._hrep[1], self.ambient_dim)

    @cached_property
    def facets(self):
        """Inner facet normals, projected into the linear span."""
        eqs = self.equations
        return tuple(sorted({primitive(project_out(f, eqs)) for f in self._hrep[0]}))

    @property
    def generators(self):
        return self.rays + self.lines + tuple(tuple(-x for x in l) for l in self.lines)

    @cached_property
    def dim(self):
        return rank(self._gens, self.ambient_dim) if self._gens else 0

    @property
    def lineality_dim(self):
        return len(self.lines)

    @property
    def is_pointed(self):
        return not self.lines

    @property
    def is_full_dim(self):
        return self.dim == self.ambient_dim

    @property
    def is_simplicial(self):
        return self.is_pointed and len(self.rays) == self.dim

    @cached_property
    def key(self):
        return (self.ambient_dim, self.rays, self.lines)

    def __eq__(self, other):
        return isinstance(other, Cone) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        parts = [str(r) for r in self.rays] + [f"+-{l}" for l in self.lines]
        if not parts:
            return f"Cone(0 in Q^{self.ambient_dim})"
        return "cone(" + ", ".join(parts) + ")"

    # membership

    def _check_dim(self, n):
        if n != self.ambient_dim:
            raise ValidationError(f"dimension mismatch: {n} vs {self.ambient_dim}")

    def contains(self, v):
        self._check_dim(len(v))
        return all(dot(e, v) == 0 for e in self.equations) and all(dot(f, v) >= 0 for f in self.facets)

    def __contains__(self, v):
        return self.contains(tuple(v))

    def rel_interior_contains(self, v):
        self._check_dim(len(v))
        return all(dot(e, v) == 0 for e in self.equations) and all(dot(f, v) > 0 for f in self.facets)

    def interior_point(self):
        """An integer point of the relative interior (the sum of the extreme rays)."""
        return tuple(sum(col) for col in zip(*self.rays)) if self.rays else (0,) * self.ambient_dim

    def __le__(self, other):
        self._check_dim(other.ambient_dim)
        return all(other.contains(g) for g in self.generators)

    def relint_subset(self, other):
        """Whether ``self° ⊆ other°``."""
        return self <= other and other.rel_interior_contains(self.interior_point())

    def relint_meets(self, other):
        """Whether the relative interiors of the two cones intersect."""
        meet = self.intersection(other)
        p = meet.interior_point()
        return self.rel_interior_contains(p) and other.rel_interior_contains(p)

    # constructions

    def intersection(self, other):
        self._check_dim(other.ambient_dim)
        return Cone.from_inequalities(
            self.facets + other.facets, self.equations + other.equations, self.ambient_dim
        )

    def dual(self):
        gens = list(self.facets) + list(self.equations) + [tuple(-x for x in e) for e in self.equations]
        return Cone(gens, self.ambient_dim)

    def _face_for(self, tight):
        rays = [r for r in self.rays if all(dot(self.facets[i], r) == 0 for i in tight)]
        return rays

    def face_lattice(self):
        """All faces, as a dict from the closed set of tight facet indices to the face."""
        F = self.facets
        lines = list(self.lines) + [tuple(-x for x in l) for l in self.lines]

        def closure(S):
            rays = self._face_for(S)
            return frozenset(i for i, f in enumerate(F) if all(dot(f, r) == 0 for r in rays)), rays

        top, rays = closure(frozenset())
        faces = {top: Cone(rays + lines, self.ambient_dim)}
        todo = [top]
        while todo:
            S = todo.pop()
            for i in range(len(F)):
                if i in S:
                    continue
                T, rays = closure(S | {i})
                if T not in faces:
                    faces[T] = Cone(rays + lines, self.ambient_dim)
                    todo.append(T)
        return faces

    def faces(self, d=None):
        out = sorted(set(self.face_lattice().values()))
        if d is None:
            return out
        return [f for f in out if f.dim == d]

    def is_face_of(self, other):
        if not self <= other:
            return False
        tight = [f for f in other.facets if all(dot(f, g) == 0 for g in self.generators)]
        lines = list(other.lines) + [tuple(-x for x in l) for l in other.lines]
        rays = [r for r in other.rays if all(dot(f, r) == 0 for f in tight)]
        return Cone(rays + lines, other.ambient_dim) == self


def is_face(C0, C):
    return C0.is_face_of(C)


def dual_cone(C):
    return C.dual()


def intersect(C1, C2):
    return C1.intersection(C2)


def intersect_all(cones, ambient_dim):
    cones = list(cones)
    if not cones:
        raise ValidationError("nothing to intersect")
    facets = [f for c in cones for f in c.facets]
    eqs = [e for c in cones for e in c.equations]
    return Cone.from_inequalities(facets, eqs, ambient_dim)


def rel_interior_contains(C, v):
    return C.rel_interior_contains(tuple(v))


def face_correspondence(gamma0, r):
    """The complementary index set: ``gamma_0^* = gamma_0^perp ∩ delta``."""
    gamma0 = frozenset(gamma0)
    if any(not 0 <= i < r for i in gamma0):
        raise ValidationError("face index out of range")
    return frozenset(range(r)) - gamma0


class Fan:
    """Fan given by its maximal cones as sets of indices into ``rays``.

    ``rays`` may contain vectors that no cone uses; this keeps ray indices
    aligned with the variables of a Cox ring.
    """

    def __init__(self, rays, cones):
        self.rays = tuple(primitive(tuple(r)) for r in rays)
        if not self.rays:
            raise ValidationError("fan without rays")
        self.ambient_dim = len(self.rays[0])
        cones = {frozenset(c) for c in cones}
        for c in cones:
            if any(not 0 <= i < len(self.rays) for i in c):
                raise ValidationError("cone refers to a missing ray")
        self.cones = tuple(sorted(cones, key=lambda c: sorted(c)))

    def cone(self, indices):
        return Cone([self.rays[i] for i in indices], self.ambient_dim)

    @cached_property
    def maximal_cones(self):
        return [self.cone(c) for c in self.cones]

    @property
    def used_rays(self):
        return frozenset().union(*self.cones) if self.cones else frozenset()

    @cached_property
    def key(self):
        return frozenset(frozenset(self.rays[i] for i in c) for c in self.cones)

    def __eq__(self, other):
        return isinstance(other, Fan) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return "Fan(" + ", ".join("{" + ",".join(str(i + 1) for i in sorted(c)) + "}" for c in self.cones) + ")"

    def support_contains(self, v):
        return any(c.contains(tuple(v)) for c in self.maximal_cones)

    def is_simplicial(self):
        return all(c.is_simplicial for c in self.maximal_cones)

    def check(self):
        """List violations of the fan axioms (empty list when valid)."""
        problems = []
        mc = self.maximal_cones
        for c, C in zip(self.cones, mc):
            if not C.is_pointed:
                problems.append(f"cone {sorted(c)} is not strictly convex")
        for (a, A), (b, B) in combinations(zip(self.cones, mc), 2):
            if A <= B or B <= A:
                problems.append(f"cones {sorted(a)} and {sorted(b)} are nested")
                continue
            meet = A.intersection(B)
            if not (meet.is_face_of(A) and meet.is_face_of(B)):
                problems.append(f"cones {sorted(a)} and {sorted(b)} do not meet in a common face")
        return problems

    def minimal_cone_containing(self, v):
        """Ray index set of the cone of the fan having ``v`` in its relative interior."""
        v = tuple(v)
        for c, C in zip(self.cones, self.maximal_cones):
            if not C.contains(v):
                continue
            tight = [f for f in C.facets if dot(f, v) == 0]
            return frozenset(i for i in c if all(dot(f, self.rays[i]) == 0 for f in tight))
        return None

    def relabeled(self, keep):
        """Fan on the rays ``keep`` (in that order); cones must avoid dropped rays."""
        pos = {old: new for new, old in enumerate(keep)}
        cones = []
        for c in self.cones:
            if any(i not in pos for i in c):
                raise ValidationError("cannot drop a ray used by the fan")
            cones.append({pos[i] for i in c})
        return Fan([self.rays[i] for i in keep], cones)


def stellar_subdivide(fan, v_inf):
    """Stellar subdivision of ``fan`` at the primitive lattice vector ``v_inf``.

    Returns ``(new_fan, index)`` where ``index`` is the ray index of ``v_inf``.
    """
    v = tuple(v_inf)
    if primitive(v) != v or not any(v):
        raise ValidationError(f"{v} is not a primitive lattice vector")
    s0 = fan.minimal_cone_containing(v)
    if s0 is None:
        raise ValidationError(f"{v} lies outside the support of the fan")
    if fan.cone(s0).dim <= 1:
        raise ValidationError(f"{v} lies on a ray of the fan; nothing to subdivide")
    if v in fan.rays:
        idx = fan.rays.index(v)
        rays = list(fan.rays)
    else:
        idx = len(fan.rays)
        rays = list(fan.rays) + [v]
    cones = [c for c in fan.cones if not s0 <= c]
    for c in fan.cones:
        if not s0 <= c:
            continue
        C = fan.cone(c)
        for f in C.facets:
            tau = frozenset(i for i in c if dot(f, fan.rays[i]) == 0)
            if not s0 <= tau:
                cones.append(tau | {idx})
    return Fan(rays, cones), idx


@dataclass(frozen=True)
class GaleTransform:
    """Gale dual data of a grading: ``P`` has the kernel basis of ``Q`` as rows."""

    P: tuple
    rank: int
    columns: tuple
    primitive_columns: tuple
    multiplicities: tuple
    degenerate: bool


def gale_transform(Q):
    """Gale dual of ``Q``: ``P`` is the HNF basis of the kernel lattice, as rows."""
    return gale_from_matrix(grading_kernel(Q), Q.source_rank)


def gale_from_matrix(M, r=None):
    """Gale data for an explicit matrix ``P`` whose rows span the kernel lattice."""
    M = [tuple(row) for row in M]
    if r is None:
        r = len(M[0]) if M else 0
    cols = tuple(tuple(row[i] for row in M) for i in range(r))
    prim, mult = [], []
    for c in cols:
        p = primitive(c)
        prim.append(p)
        mult.append(next((a // b for a, b in zip(c, p) if b), 0))
    return GaleTransform(
        P=tuple(tuple(row) for row in M),
        rank=len(M),
        columns=cols,
        primitive_columns=tuple(prim),
        multiplicities=tuple(mult),
        degenerate=len(M) == 0,
    )


def unimodular_equivalence(Pa, Pb):
    """Integer unimodular ``U`` with ``U @ Pa == Pb`` (both full row rank), or None."""
    Pa = [list(r) for r in Pa]
    Pb = [list(r) for r in Pb]
    n = len(Pa)
    if n != len(Pb) or (n and len(Pa[0]) != len(Pb[0])):
        return None
    if n == 0:
        return []
    r = len(Pa[0])
    cols = []
    for j in range(r):
        trial = cols + [j]
        if rank([[Pa[i][c] for i in range(n)] for c in trial], n) == len(trial):
            cols = trial
        if len(cols) == n:
            break
    if len(cols) < n:
        return None
    # rows of U: u with u . Pa[:, cols] = Pb[row, cols]
    A_cols = [[Pa[i][c] for c in cols] for i in range(n)]  # columns of A^T are the rows of Pa restricted
    U = []
    for row in Pb:
        u = solve(A_cols, [row[c] for c in cols])
        if u is None or any(Fraction(x).denominator != 1 for x in u):
            return None
        U.append([int(x) for x in u])
    for i in range(n):
        for j in range(r):
            if sum(U[i][k] * Pa[k][j] for k in range(n)) != Pb[i][j]:
                return None
    if abs(det(U)) != 1:
        return None
    return U
