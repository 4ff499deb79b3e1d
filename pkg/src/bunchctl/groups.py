"""Finitely generated abelian groups, integer normal forms and grading maps.

A group ``K = Z^k + Z/d_1 + ... + Z/d_t`` is encoded by its free rank and its
invariant factors.  Elements are pairs (free coordinates, torsion residues).
Subgroups are stored as lattices in ``Z^(k+t)`` containing the relation
lattice spanned by the ``d_i e_(k+i)``; their canonical basis is the row
Hermite normal form of that lattice, so equal subgroups compare equal
literally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

from ._linalg import identity, transpose
from .errors import ValidationError

INFINITE = math.inf


def smith_normal_form(A, ncols=None):
    """Smith normal form with transforms.

    Returns ``(U, D, V)`` with ``U @ A @ V == D``, ``U`` and ``V`` unimodular,
    ``D`` diagonal with nonnegative entries ``d_1 | d_2 | ...``.
    """
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    D = [list(r) for r in A]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        D[dst] = [a - q * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for M in (D, V):
            for row in M:
                row[dst] -= q * row[src]

    for t in range(min(m, n)):
        nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = D[t][t]
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // p)
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // p)
            rest = [(abs(D[i][t]), i, t) for i in range(t + 1, m) if D[i][t]]
            rest += [(abs(D[t][j]), t, j) for j in range(t + 1, n) if D[t][j]]
            if rest:
                _, i, j = min(rest)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, -1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return U, D, V


def hermite_normal_form(G, ncols=None):
    """Row Hermite normal form of the lattice spanned by the rows of ``G``.

    Returns ``(H, U, rank)`` where ``U @ G`` equals ``H`` padded with zero
    rows, so the rows ``U[rank:]`` are a basis of the left kernel of ``G``.
    Pivots are positive and entries above a pivot lie in ``[0, pivot)``.
    """
    m = len(G)
    n = len(G[0]) if m else (ncols or 0)
    H = [list(r) for r in G]
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if H[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(H[i][c]))
            H[r], H[p] = H[p], H[r]
            U[r], U[p] = U[p], U[r]
            clean = True
            for i in range(r + 1, m):
                if H[i][c]:
                    q = H[i][c] // H[r][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    clean = clean and H[i][c] == 0
            if clean:
                break
        if H[r][c] == 0:
            continue
        if H[r][c] < 0:
            H[r] = [-x for x in H[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = H[i][c] // H[r][c]
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
    return H[:r], U, r


def lattice_basis(rows, ncols):
    """Canonical (HNF) basis of the lattice spanned by ``rows``, as tuples."""
    H, _, _ = hermite_normal_form([list(r) for r in rows], ncols)
    return tuple(tuple(h) for h in H)


def integer_kernel(A, ncols):
    """Z-basis (HNF) of ``{x in Z^ncols : A x = 0}``."""
    if not A:
        return tuple(tuple(r) for r in identity(ncols))
    _, U, r = hermite_normal_form(transpose(A), len(A))
    return lattice_basis(U[r:], ncols)


def lattice_intersection(B1, B2, ncols):
    """HNF basis of the intersection of two lattices given by row bases."""
    if not B1 or not B2:
        return ()
    stacked = [list(b) for b in B1] + [[-x for x in b] for b in B2]
    _, U, r = hermite_normal_form(stacked, ncols)
    vecs = []
    for u in U[r:]:
        x = u[: len(B1)]
        vecs.append([sum(c * b[j] for c, b in zip(x, B1)) for j in range(ncols)])
    return lattice_basis(vecs, ncols)


def cokernel(R, nrows):
    """Cokernel ``Z^nrows / im(R)`` of an integer matrix with relation columns.

    Returns ``(group, rows)`` where ``rows`` is the list of integer row vectors
    such that the class of ``x`` has free coordinates ``rows[i] . x`` for the
    first ``group.rank`` rows and torsion residues for the remaining ones.
    """
    ncols = len(R[0]) if R else 0
    if ncols == 0:
        return AbelianGroup(nrows, ()), [list(r) for r in identity(nrows)]
    U, D, _ = smith_normal_form(R, ncols)
    diag = [D[i][i] for i in range(min(nrows, ncols))]
    s = sum(1 for d in diag if d)
    torsion_idx = [i for i in range(s) if diag[i] > 1]
    orders = tuple(diag[i] for i in torsion_idx)
    group = AbelianGroup(nrows - s, orders)
    rows = [U[i] for i in range(s, nrows)] + [U[i] for i in torsion_idx]
    return group, rows


@dataclass(frozen=True)
class AbelianGroup:
    """``Z^rank + Z/d_1 + ... + Z/d_t`` in invariant-factor form."""

    rank: int
    torsion_orders: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion_orders", tuple(int(d) for d in self.torsion_orders))
        if self.rank < 0:
            raise ValidationError("negative rank")
        for i, d in enumerate(self.torsion_orders):
            if d < 2:
                raise ValidationError(f"torsion order {d} < 2")
            if i + 1 < len(self.torsion_orders) and self.torsion_orders[i + 1] % d:
                raise ValidationError("torsion orders must satisfy d_i | d_(i+1)")

    @property
    def ngens(self):
        return self.rank + len(self.torsion_orders)

    @property
    def is_free(self):
        return not self.torsion_orders

    def element(self, free=None, torsion=None):
        free = tuple(free) if free is not None else (0,) * self.rank
        torsion = tuple(torsion) if torsion is not None else (0,) * len(self.torsion_orders)
        return GroupElement(self, free, torsion)

    def from_vector(self, v):
        v = list(v)
        return GroupElement(self, tuple(v[: self.rank]), tuple(v[self.rank:]))

    def zero(self):
        return self.element()

    def relation_vectors(self):
        """The vectors ``d_i e_(k+i)`` spanning the kernel of ``Z^(k+t) -> K``."""
        out = []
        for i, d in enumerate(self.torsion_orders):
            v = [0] * self.ngens
            v[self.rank + i] = d
            out.append(tuple(v))
        return out

    def order(self):
        if self.rank:
            return INFINITE
        return reduce(lambda a, b: a * b, self.torsion_orders, 1)

    def elements(self, box=0):
        """Iterate the elements with free coordinates in ``[-box, box]``."""
        from itertools import product

        ranges = [range(-box, box + 1)] * self.rank + [range(d) for d in self.torsion_orders]
        for v in product(*ranges):
            yield self.from_vector(v)

    def __str__(self):
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion_orders]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class GroupElement:
    group: AbelianGroup = field(repr=False)
    free: tuple
    torsion: tuple = ()

    def __post_init__(self):
        g = self.group
        free = tuple(int(x) for x in self.free)
        torsion = tuple(int(x) % d for x, d in zip(self.torsion, g.torsion_orders))
        if len(free) != g.rank or len(tuple(self.torsion)) != len(g.torsion_orders):
            raise ValidationError(f"element {self.free}/{self.torsion} does not fit {g}")
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "torsion", torsion)

    @property
    def vector(self):
        return self.free + self.torsion

    def __add__(self, other):
        return GroupElement(
            self.group,
            tuple(a + b for a, b in zip(self.free, other.free)),
            tuple(a + b for a, b in zip(self.torsion, other.torsion)),
        )

    def __neg__(self):
        return GroupElement(self.group, tuple(-a for a in self.free), tuple(-a for a in self.torsion))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n):
        return GroupElement(self.group, tuple(n * a for a in self.free), tuple(n * a for a in self.torsion))

    def is_zero(self):
        return not any(self.free) and not any(self.torsion)

    def __str__(self):
        if not self.torsion:
            return "(" + ", ".join(map(str, self.free)) + ")"
        return "(" + ", ".join([*map(str, self.free), *(f"{t}bar" for t in self.torsion)]) + ")"


@dataclass(frozen=True)
class GradingMap:
    """A homomorphism ``Q: Z^r -> K`` given by the images of the basis vectors."""

    target: AbelianGroup
    columns: tuple

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        for c in self.columns:
            if c.group != self.target:
                raise ValidationError("grading column lives in a different group")

    @classmethod
    def from_rows(cls, free_rows, torsion_rows=(), torsion_orders=()):
        """Build from matrix rows; torsion orders need not be in normal form."""
        free_rows = [list(r) for r in free_rows]
        torsion_rows = [list(r) for r in torsion_rows]
        rows = free_rows + torsion_rows
        if not rows:
            raise ValidationError("empty grading matrix")
        r = len(rows[0])
        if any(len(row) != r for row in rows):
            raise ValidationError("grading rows have different lengths")
        if len(torsion_rows) != len(torsion_orders):
            raise ValidationError("one torsion row per torsion order expected")
        k = len(free_rows)
        orders = [int(d) for d in torsion_orders]
        if any(d < 1 for d in orders):
            raise ValidationError("torsion orders must be positive")
        if all(d >= 2 for d in orders) and all(b % a == 0 for a, b in zip(orders, orders[1:])):
            group = AbelianGroup(k, tuple(orders))
            cols = [group.from_vector([row[j] for row in rows]) for j in range(r)]
            return cls(group, tuple(cols))
        # renormalize Z^k + Z/d_1 + ... through its presentation
        n = k + len(orders)
        rel = [[0] * len(orders) for _ in range(n)]
        for i, d in enumerate(orders):
            rel[k + i][i] = d
        group, maps = cokernel(rel, n)
        cols = []
        for j in range(r):
            v = [row[j] for row in rows]
            cols.append(group.from_vector([sum(a * b for a, b in zip(m, v)) for m in maps]))
        return cls(group, tuple(cols))

    @classmethod
    def from_matrix(cls, rows):
        return cls.from_rows(rows)

    @property
    def source_rank(self):
        return len(self.columns)

    @property
    def matrix(self):
        """``(k+t) x r`` integer matrix: free rows then torsion residue rows."""
        return [[c.vector[i] for c in self.columns] for i in range(self.target.ngens)]

    @property
    def free_matrix(self):
        return free_part(self)

    def image(self, x):
        total = self.target.zero()
        for a, c in zip(x, self.columns):
            if a:
                total = total + a * c
        return total

    def free_column(self, i):
        return self.columns[i].free

    def permuted(self, perm):
        return GradingMap(self.target, tuple(self.columns[p] for p in perm))

    def __str__(self):
        return " ".join(str(c) for c in self.columns) + f" in {self.target}"


def free_part(Q):
    """The ``k x r`` matrix of free coordinates of the columns of ``Q``."""
    k = Q.target.rank
    return [[c.free[i] for c in Q.columns] for i in range(k)]


@dataclass(frozen=True, eq=False)
class Subgroup:
    """Subgroup of ``ambient`` with canonical HNF basis of its preimage lattice."""

    ambient: AbelianGroup
    generators: tuple
    basis: tuple = None

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        vecs = [g.vector for g in gens] + self.ambient.relation_vectors()
        object.__setattr__(self, "basis", lattice_basis(vecs, self.ambient.ngens))

    @classmethod
    def full(cls, ambient):
        gens = [ambient.from_vector(e) for e in identity(ambient.ngens)]
        return cls(ambient, tuple(gens))

    @classmethod
    def from_basis(cls, ambient, basis):
        return cls(ambient, tuple(ambient.from_vector(b) for b in basis))

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def index(self):
        """Number of cosets in the ambient group, ``INFINITE`` if rank deficient."""
        n = self.ambient.ngens
        if len(self.basis) < n:
            return INFINITE
        idx = 1
        for i, row in enumerate(self.basis):
            idx *= next(x for x in row if x)
        return idx

    def contains(self, element):
        v = element.vector if isinstance(element, GroupElement) else tuple(element)
        return lattice_basis(list(self.basis) + [v], self.ambient.ngens) == self.basis

    def __contains__(self, element):
        return self.contains(element)

    def is_subgroup_of(self, other):
        return all(other.contains(b) for b in self.basis)

    def __str__(self):
        idx = self.index()
        elems = [self.ambient.from_vector(b) for b in self.basis]
        gens = ", ".join(str(e) for e in elems if not e.is_zero()) or "0"
        return f"<{gens}> (index {'infinite' if idx == INFINITE else idx})"


def sublattice_image(Q, indices):
    """Subgroup ``Q(lin(gamma_0) & E)`` generated by the selected columns, and its index."""
    indices = sorted(indices)
    for i in indices:
        if not 0 <= i < Q.source_rank:
            raise ValidationError(f"index {i} out of range")
    S = Subgroup(Q.target, tuple(Q.columns[i] for i in indices))
    return S, S.index()


def subgroup_intersect(subgroups):
    subgroups = list(subgroups)
    if not subgroups:
        raise ValidationError("nothing to intersect")
    amb = subgroups[0].ambient
    if any(s.ambient != amb for s in subgroups):
        raise ValidationError("subgroups live in different groups")
    basis = subgroups[0].basis
    for s in subgroups[1:]:
        basis = lattice_intersection(basis, s.basis, amb.ngens)
    return Subgroup.from_basis(amb, basis)


def grading_kernel(Q):
    """HNF basis of ``M = ker(Q: Z^r -> K)``, torsion congruences included."""
    r = Q.source_rank
    K = Q.target
    A = Q.matrix
    t = len(K.torsion_orders)
    # [A | D] (x, y) = 0 where D holds the relation columns d_i e_(k+i)
    aug = [list(row) + [0] * t for row in A]
    for i, d in enumerate(K.torsion_orders):
        aug[K.rank + i][r + i] = d
    if not aug:
        return tuple(tuple(e) for e in identity(r))
    kern = integer_kernel(aug, r + t)
    return lattice_basis([k[:r] for k in kern], r)
