"""Exact polynomials over Q graded by a finitely generated abelian group.

Only presentations with at most one relation are supported.  For such a
hypersurface the F-face test reduces to counting terms of the restricted
relation: over an algebraically closed field of characteristic zero a
Laurent polynomial with two or more terms vanishes somewhere on the torus,
a single monomial vanishes nowhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ._linalg import rank
from .errors import ParseError, UnsupportedError, ValidationError
from .groups import GradingMap


def _order_key(exp):
    # graded lexicographic, largest first
    return (-sum(exp), tuple(-e for e in exp))


class GradedPoly:
    """Polynomial in ``T_1..T_n`` with exact rational coefficients.

    Stored as a tuple of ``(exponent, coefficient)`` pairs without zero
    coefficients, sorted by degree-lexicographic order (largest first).
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=()):
        acc = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for exp, c in terms:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValidationError(f"exponent {exp} does not have {nvars} entries")
            if any(e < 0 for e in exp):
                raise ValidationError(f"negative exponent in {exp}")
            acc[exp] = acc.get(exp, 0) + Fraction(c)
        self.nvars = nvars
        self.terms = tuple(sorted(((e, c) for e, c in acc.items() if c), key=lambda t: _order_key(t[0])))

    @classmethod
    def variable(cls, nvars, i):
        return cls(nvars, [(tuple(int(j == i) for j in range(nvars)), 1)])

    @classmethod
    def monomial(cls, exp, coeff=1):
        return cls(len(exp), [(exp, coeff)])

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, [((0,) * nvars, c)])

    @classmethod
    def parse(cls, text, nvars):
        """Parse strings like ``"T1*T2 + 3/2*T3^2 - T4*T5"`` (variables 1-based)."""
        s = text.replace(" ", "").replace("**", "^")
        if not s:
            raise ParseError("empty polynomial")
        if s[0] not in "+-":
            s = "+" + s
        terms = []
        for m in re.finditer(r"([+-])([^+-]+)", s):
            sign, body = m.group(1), m.group(2)
            coeff = Fraction(1 if sign == "+" else -1)
            exp = [0] * nvars
            for factor in body.split("*"):
                vm = re.fullmatch(r"[TtXx](\d+)(?:\^(\d+))?", factor)
                if vm:
                    i = int(vm.group(1)) - 1
                    if not 0 <= i < nvars:
                        raise ParseError(f"variable {factor} out of range")
                    exp[i] += int(vm.group(2) or 1)
                    continue
                try:
                    coeff *= Fraction(factor)
                except ValueError:
                    raise ParseError(f"cannot parse factor {factor!r}") from None
            terms.append((exp, coeff))
        if "".join(m.group(0) for m in re.finditer(r"([+-])([^+-]+)", s)) != s:
            raise ParseError(f"cannot parse polynomial {text!r}")
        return cls(nvars, terms)

    # basic protocol

    def __eq__(self, other):
        return isinstance(other, GradedPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.terms))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def is_monomial(self):
        return len(self.terms) == 1

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"GradedPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for exp, c in self.terms:
            mon = "*".join(f"T{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exp) if e)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mon:
                body = str(a)
            elif a == 1:
                body = mon
            else:
                body = f"{a}*{mon}"
            out.append((sign, body))
        s = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, body in out[1:]:
            s += f" {sign} {body}"
        return s

    # arithmetic

    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValidationError("polynomials in different numbers of variables")

    def __add__(self, other):
        self._check(other)
        return GradedPoly(self.nvars, list(self.terms) + list(other.terms))

    def __neg__(self):
        return GradedPoly(self.nvars, [(e, -c) for e, c in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, GradedPoly):
            return GradedPoly(self.nvars, [(e, c * Fraction(other)) for e, c in self.terms])
        self._check(other)
        out = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                out.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return GradedPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = GradedPoly.constant(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    # structure

    @property
    def exponents(self):
        return [e for e, _ in self.terms]

    def support(self):
        """Indices of variables occurring in some term."""
        return frozenset(i for e, _ in self.terms for i, x in enumerate(e) if x)

    def total_degree(self):
        return max((sum(e) for e, _ in self.terms), default=-1)

    def degree_in(self, i):
        return max((e[i] for e, _ in self.terms), default=-1)

    def derivative(self, i):
        out = []
        for e, c in self.terms:
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out.append((e2, c * e[i]))
        return GradedPoly(self.nvars, out)

    def evaluate(self, point):
        total = 0
        for e, c in self.terms:
            term = c
            for x, k in zip(point, e):
                if k:
                    term *= x**k
            total += term
        return total

    def monic(self):
        """Scale so the leading coefficient is 1 (a unit normalization)."""
        if not self.terms:
            return self
        return self * (1 / self.terms[0][1])

    def permuted(self, perm):
        """Rename: variable ``perm[j]`` of ``self`` becomes variable ``j``."""
        return GradedPoly(len(perm), [(tuple(e[p] for p in perm), c) for e, c in self.terms])

    def with_new_variable(self):
        return GradedPoly(self.nvars + 1, [(e + (0,), c) for e, c in self.terms])

    def drop_variable(self, i):
        if any(e[i] for e, _ in self.terms):
            raise ValidationError(f"variable T{i + 1} still occurs")
        return GradedPoly(self.nvars - 1, [(e[:i] + e[i + 1:], c) for e, c in self.terms])

    def common_monomial_factor(self):
        if not self.terms:
            return (0,) * self.nvars
        return tuple(min(e[i] for e, _ in self.terms) for i in range(self.nvars))


def k_degree(p, Q):
    """The common K-degree of all terms of ``p``; raises if ``p`` is not homogeneous."""
    if p.is_zero():
        raise ValidationError("the zero polynomial has no degree")
    if p.nvars != Q.source_rank:
        raise ValidationError(f"polynomial has {p.nvars} variables, grading has {Q.source_rank}")
    first = None
    for e, c in p.terms:
        d = Q.image(e)
        if first is None:
            first = (d, e, c)
        elif d != first[0]:
            t1 = str(GradedPoly.monomial(first[1], first[2]))
            t2 = str(GradedPoly.monomial(e, c))
            raise ValidationError(
                f"relation is not homogeneous: {t1} has degree {first[0]}, {t2} has degree {d}"
            )
    return first[0]


def restrict_to_face(p, gamma0):
    """Set ``T_j = 0`` for every ``j`` outside ``gamma0``."""
    keep = frozenset(gamma0)
    return GradedPoly(p.nvars, [(e, c) for e, c in p.terms if all(x == 0 or i in keep for i, x in enumerate(e))])


def aux_grading_decompose(p, a):
    """Split ``p`` by the auxiliary Z-degree ``sum a_i e_i``; parts ordered by degree."""
    a = tuple(a)
    if len(a) != p.nvars:
        raise ValidationError("auxiliary degree vector has the wrong length")
    parts = {}
    for e, c in p.terms:
        k = sum(x * y for x, y in zip(a, e))
        parts.setdefault(k, []).append((e, c))
    return [(k, GradedPoly(p.nvars, parts[k])) for k in sorted(parts)]


# irreducibility checks (absolute, i.e. over an algebraically closed field)


def quadratic_form_rank(p):
    """Rank of ``p`` as a quadratic form, or None if ``p`` is not a quadratic form."""
    if p.is_zero() or any(sum(e) != 2 for e, _ in p.terms):
        return None
    idx = sorted(p.support())
    pos = {v: k for k, v in enumerate(idx)}
    n = len(idx)
    M = [[Fraction(0)] * n for _ in range(n)]
    for e, c in p.terms:
        vs = [i for i, x in enumerate(e) for _ in range(x)]
        i, j = pos[vs[0]], pos[vs[1]]
        if i == j:
            M[i][i] += c
        else:
            M[i][j] += c / 2
            M[j][i] += c / 2
    return rank(M, n)


def _linear_variable_certificate(p):
    """A variable ``x`` with ``p = A*x + B``, ``A`` a monomial, ``B != 0`` coprime to ``A``."""
    for i in sorted(p.support()):
        if p.degree_in(i) != 1:
            continue
        A = [(e, c) for e, c in p.terms if e[i] == 1]
        B = [(e, c) for e, c in p.terms if e[i] == 0]
        if len(A) != 1 or not B:
            continue
        ea = A[0][0]
        # a common factor would be a monomial: some variable of A dividing all of B
        if any(ea[j] and j != i and all(e[j] for e, _ in B) for j in range(p.nvars)):
            continue
        return i
    return None


def irreducibility_certificate(p):
    """A short reason why ``p`` is irreducible, or None if no check applies."""
    if p.is_zero() or p.total_degree() < 1:
        return None
    if p.is_monomial():
        e = p.terms[0][0]
        return "a single variable" if sum(e) == 1 else None
    if p.total_degree() == 1 and all(sum(e) <= 1 for e in p.exponents) and any(sum(e) == 1 for e in p.exponents):
        return "linear polynomial"
    qr = quadratic_form_rank(p)
    if qr is not None and qr >= 3:
        return f"quadratic form of rank {qr}"
    i = _linear_variable_certificate(p)
    if i is not None:
        return f"linear in T{i + 1} with monomial coefficient coprime to the rest"
    return None


VERIFIED = "verified"
ATTESTED = "attested"
UNKNOWN = "unknown"

MULTI_RELATION = "unsupported: multi-relation F-face test requires radical membership"


@dataclass(frozen=True)
class Attestations:
    """Hypotheses supplied by the user instead of being decided."""

    generators: frozenset = frozenset()  # indices attested K-prime
    relation_prime: bool = False
    factorially_graded: bool = False


@dataclass(frozen=True)
class PrimalityStatus:
    status: str
    reason: str

    def __str__(self):
        return f"{self.status} ({self.reason})"


class CoxPresentation:
    """``K[T_1..T_r]/(f)`` graded by ``Q``, with at most one relation ``f``."""

    def __init__(self, grading: GradingMap, relations=(), attestations=None, names=None):
        relations = [f for f in relations if not f.is_zero()]
        if len(relations) > 1:
            raise UnsupportedError(MULTI_RELATION)
        self.grading = grading
        self.relations = tuple(relations)
        self.attestations = attestations or Attestations()
        self.names = tuple(names) if names else tuple(f"T{i + 1}" for i in range(grading.source_rank))
        if len(self.names) != grading.source_rank:
            raise ValidationError("one name per variable expected")
        for f in self.relations:
            if f.nvars != grading.source_rank:
                raise ValidationError(f"relation has {f.nvars} variables, grading has {grading.source_rank}")
            if f.total_degree() == 0:
                raise ValidationError("relation is a nonzero constant")
            k_degree(f, grading)

    @property
    def nvars(self):
        return self.grading.source_rank

    @property
    def relation(self):
        return self.relations[0] if self.relations else None

    @property
    def is_toric(self):
        return not self.relations

    def relation_degree(self):
        return k_degree(self.relation, self.grading) if self.relations else None

    def relation_status(self):
        if self.is_toric:
            return PrimalityStatus(VERIFIED, "no relation")
        reason = irreducibility_certificate(self.relation)
        if reason:
            return PrimalityStatus(VERIFIED, reason)
        if self.attestations.relation_prime:
            return PrimalityStatus(ATTESTED, "relation K-prime by attestation")
        return PrimalityStatus(UNKNOWN, "no automatic check applies")

    def generator_status(self, i):
        if self.is_toric:
            return PrimalityStatus(VERIFIED, "variable of a polynomial ring")
        f = self.relation
        rel = self.relation_status()
        if i not in f.support():
            if rel.status == VERIFIED:
                return PrimalityStatus(VERIFIED, "variable not in the relation, relation irreducible")
        else:
            g = restrict_to_face(f, frozenset(range(self.nvars)) - {i})
            if not g.is_zero() and rel.status == VERIFIED:
                reason = irreducibility_certificate(g)
                if reason:
                    return PrimalityStatus(VERIFIED, f"relation modulo T{i + 1} irreducible: {reason}")
        if i in self.attestations.generators:
            return PrimalityStatus(ATTESTED, "K-prime by attestation")
        return PrimalityStatus(UNKNOWN, "no automatic check applies")

    def factorial_status(self):
        if self.is_toric:
            return PrimalityStatus(VERIFIED, "polynomial ring")
        if self.attestations.factorially_graded:
            return PrimalityStatus(ATTESTED, "factorially graded by attestation")
        return PrimalityStatus(UNKNOWN, "factorial grading not decided")

    def primality_report(self):
        return {
            "generators": [self.generator_status(i) for i in range(self.nvars)],
            "relation": self.relation_status(),
            "factorially_graded": self.factorial_status(),
        }

    def with_relation(self, grading, relation, names=None, attestations=None):
        return CoxPresentation(grading, [relation] if relation is not None else [], attestations or self.attestations, names)

    def __eq__(self, other):
        return (
            isinstance(other, CoxPresentation)
            and self.grading == other.grading
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash((self.grading, self.relations))

    def __repr__(self):
        rel = str(self.relation) if self.relations else "none"
        return f"CoxPresentation(Q={self.grading}, relation={rel})"


def is_f_face(pres, gamma0):
    """Whether the coordinate stratum of ``gamma0`` meets the total coordinate space."""
    if len(pres.relations) > 1:
        raise UnsupportedError(MULTI_RELATION)
    if pres.is_toric:
        return True
    g = restrict_to_face(pres.relation, gamma0)
    return len(g) != 1
