"""Small exact linear algebra helpers on tuples of ints and Fractions."""

from fractions import Fraction
from functools import reduce
from math import gcd


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def content(v):
    return reduce(gcd, (abs(x) for x in v), 0)


def primitive(v):
    """Divide an integer vector by the gcd of its entries."""
    g = content(v)
    if g == 0:
        return tuple(0 for _ in v)
    return tuple(x // g for x in v)


def sign_normalized(v):
    """Primitive representative of the line through v, first nonzero entry positive."""
    v = primitive(v)
    for x in v:
        if x:
            return v if x > 0 else tuple(-y for y in v)
    return v


def integral(v):
    """Scale a rational vector to a primitive integer vector on the same ray."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    return primitive(tuple(int(Fraction(x) * den) for x in v))


def transpose(A, ncols=None):
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A, B):
    Bt = list(zip(*B)) if B else []
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def rref(rows, ncols):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    M = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows, ncols=None):
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    return len(rref(rows, ncols if ncols is not None else len(rows[0]))[1])


def nullspace(rows, ncols):
    """Primitive integer basis of {x in Q^ncols : row . x = 0 for all rows}."""
    R, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(R, piv):
            x[p] = -row[f]
        basis.append(integral(x))
    return basis


def solve(columns, target):
    """Rational coefficients c with sum c_i columns_i = target, or None.

    The columns are assumed linearly independent.
    """
    n = len(target)
    k = len(columns)
    aug = [[Fraction(columns[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    R, piv = rref(aug, k + 1)
    if k in piv:
        return None
    sol = [Fraction(0)] * k
    for row, p in zip(R, piv):
        sol[p] = row[k]
    return sol


def in_span(vectors, v):
    if not vectors:
        return all(x == 0 for x in v)
    return rank(list(vectors) + [list(v)], len(v)) == rank(vectors, len(v))


def project_out(v, basis):
    """Orthogonal projection of v onto the complement of span(basis), as an integer ray."""
    if not basis:
        return primitive(v)
    # solve Gram system G c = B v
    B = [[Fraction(x) for x in b] for b in basis]
    G = [[dot(b1, b2) for b2 in B] for b1 in B]
    rhs = [dot(b, v) for b in B]
    c = solve([list(col) for col in zip(*G)], rhs)
    w = [Fraction(x) - sum(ci * b[i] for ci, b in zip(c, B)) for i, x in enumerate(v)]
    return integral(w)


def det(M):
    """Integer determinant by Bareiss fraction-free elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]
