"""JSON documents: input presentations, modification scripts and reports.

Variable and weight indices are 1-based in documents and 0-based in the
library.  Rationals travel as strings ``"p/q"``; integers as JSON numbers
when they fit into 53 bits, otherwise as decimal strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ._linalg import primitive
from .bunch import BunchedRing, fmt_face, projected_cone
from .cones import Cone
from .errors import ParseError, UnsupportedError, ValidationError
from .groups import INFINITE, AbelianGroup, GradingMap
from .polynomials import MULTI_RELATION, Attestations, CoxPresentation, GradedPoly

FORMAT_VERSION = 1
SAFE_INT = 2**53
TOP_LEVEL_KEYS = {"format_version", "grading", "relation", "bunch", "attestations", "ambient", "script"}


# scalars


def parse_int(x, what="integer"):
    if isinstance(x, bool):
        raise ParseError(f"{what}: expected an integer, got {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x.strip())
        except ValueError:
            pass
    raise ParseError(f"{what}: expected an integer, got {x!r}")


def parse_rational(x, what="rational"):
    if isinstance(x, bool):
        raise ParseError(f"{what}: expected a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ParseError(f"{what}: expected an integer or a string 'p/q', got {x!r}")


def fmt_int(n):
    n = int(n)
    return n if -SAFE_INT < n < SAFE_INT else str(n)


def fmt_rational(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _int_list(x, what):
    if not isinstance(x, list):
        raise ParseError(f"{what}: expected a list")
    return [parse_int(v, what) for v in x]


def _matrix(x, what):
    if not isinstance(x, list):
        raise ParseError(f"{what}: expected a list of rows")
    return [_int_list(row, what) for row in x]


def _index_set(x, r, what):
    idx = _int_list(x, what)
    for i in idx:
        if not 1 <= i <= r:
            raise ValidationError(f"{what}: index {i} outside 1..{r}")
    return frozenset(i - 1 for i in idx)


# input documents


@dataclass
class InputDocument:
    pres: CoxPresentation
    bunch_cones: list = None  # list of frozensets (0-based) or None
    chamber_point: tuple = None
    ambient_P: list = None
    ambient_chamber_point: tuple = None
    script: list = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    def build_bunch(self, max_vars=20):
        if self.bunch_cones is not None:
            Q = self.pres.grading
            cones = [projected_cone(Q, c) for c in self.bunch_cones]
            return BunchedRing(self.pres, cones, max_vars=max_vars)
        return BunchedRing.from_chamber_point(self.pres, self.chamber_point, max_vars=max_vars)

    def __eq__(self, other):
        return isinstance(other, InputDocument) and dump_input(self) == dump_input(other)


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from None


def parse_grading(g):
    if not isinstance(g, dict):
        raise ParseError("grading: expected an object")
    free = _matrix(g.get("free_rows", []), "grading.free_rows")
    tors = _matrix(g.get("torsion_rows", []), "grading.torsion_rows")
    orders = _int_list(g.get("torsion_orders", []), "grading.torsion_orders")
    if "rank" in g and parse_int(g["rank"], "grading.rank") != len(free):
        raise ValidationError("grading.rank differs from the number of free rows")
    if len(tors) != len(orders):
        raise ValidationError("one torsion row per torsion order expected")
    for row, d in zip(tors, orders):
        if d < 1:
            raise ValidationError(f"torsion order {d} is not positive")
    if not free and not tors:
        n = parse_int(g.get("nvars", 0), "grading.nvars")
        if n < 1:
            raise ValidationError("grading without rows needs nvars")
        return _trivial_grading(n)
    return GradingMap.from_rows(free, tors, orders)


def _trivial_grading(n):
    K = AbelianGroup(0, ())
    return GradingMap(K, tuple(K.zero() for _ in range(n)))


def parse_relation(rel, r):
    if rel is None:
        return None
    if isinstance(rel, str):
        return GradedPoly.parse(rel, r)
    if not isinstance(rel, list):
        raise ParseError("relation: expected a list of terms or a string")
    if not rel:
        return None
    if all(isinstance(x, (str, list)) for x in rel):
        # a list of relations; only zero or one of them is supported
        polys = [p for p in (parse_relation(x, r) for x in rel) if p is not None and not p.is_zero()]
        if len(polys) > 1:
            raise UnsupportedError(MULTI_RELATION)
        return polys[0] if polys else None
    terms = []
    for t in rel:
        if not isinstance(t, dict) or "exponents" not in t:
            raise ParseError("relation term: expected {coeff, exponents}")
        exp = _int_list(t["exponents"], "relation.exponents")
        if len(exp) != r:
            raise ValidationError(f"relation term has {len(exp)} exponents, expected {r}")
        terms.append((exp, parse_rational(t.get("coeff", 1), "relation.coeff")))
    return GradedPoly(r, terms)


def parse_attestations(a, r):
    if a is None:
        return Attestations()
    if not isinstance(a, dict):
        raise ParseError("attestations: expected an object")
    gens = a.get("generators", [])
    if gens is True:
        gens = frozenset(range(r))
    elif gens is False:
        gens = frozenset()
    else:
        gens = _index_set(gens, r, "attestations.generators")
    return Attestations(gens, bool(a.get("relation_prime", False)), bool(a.get("factorially_graded", False)))


def parse_script(steps, r=None):
    if steps is None:
        return []
    if isinstance(steps, dict):
        steps = steps.get("script", [])
    if not isinstance(steps, list):
        raise ParseError("script: expected a list of steps")
    out = []
    for s in steps:
        if not isinstance(s, dict) or len(set(s) & {"subdivide_at", "contract", "retarget_chamber"}) != 1:
            raise ParseError(f"script step {s!r}: expected exactly one of subdivide_at, contract, retarget_chamber")
        if "subdivide_at" in s:
            out.append(("subdivide_at", tuple(_int_list(s["subdivide_at"], "subdivide_at")), bool(s.get("attest_prime", False))))
        elif "contract" in s:
            i = parse_int(s["contract"], "contract")
            if i < 1:
                raise ValidationError("contract: indices are 1-based")
            out.append(("contract", i - 1, bool(s.get("attest_prime", False))))
        else:
            out.append(("retarget_chamber", tuple(_int_list(s["retarget_chamber"], "retarget_chamber")), False))
    return out


def parse_input(data):
    if not isinstance(data, dict):
        raise ParseError("document: expected a JSON object")
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise ParseError(f"document: unknown field(s) {', '.join(sorted(unknown))}")
    version = parse_int(data.get("format_version", FORMAT_VERSION), "format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version}")
    if "grading" not in data:
        raise ParseError("document: missing grading")
    Q = parse_grading(data["grading"])
    r = Q.source_rank
    f = parse_relation(data.get("relation"), r)
    att = parse_attestations(data.get("attestations"), r)
    pres = CoxPresentation(Q, [f] if f is not None else [], att)
    b = data.get("bunch")
    cones = point = None
    if b is not None:
        if not isinstance(b, dict) or ("cones" in b) == ("chamber_point" in b):
            raise ParseError("bunch: expected exactly one of cones, chamber_point")
        if "cones" in b:
            if not isinstance(b["cones"], list):
                raise ParseError("bunch.cones: expected a list of index lists")
            cones = [_index_set(c, r, "bunch.cones") for c in b["cones"]]
        else:
            point = tuple(_int_list(b["chamber_point"], "bunch.chamber_point"))
    else:
        raise ParseError("document: missing bunch")
    amb = data.get("ambient")
    P = apoint = None
    if amb is not None:
        if not isinstance(amb, dict):
            raise ParseError("ambient: expected an object")
        if "P" in amb:
            P = _matrix(amb["P"], "ambient.P")
            if any(len(row) != r for row in P):
                raise ValidationError(f"ambient.P rows must have {r} entries")
        if "chamber_point" in amb:
            apoint = tuple(_int_list(amb["chamber_point"], "ambient.chamber_point"))
    return InputDocument(pres, cones, point, P, apoint, parse_script(data.get("script")), version)


def load_input(text):
    return parse_input(_load_json(text))


def load_input_path(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    return load_input(text)


def load_script_path(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    return parse_script(_load_json(text))


# serialization


def dump_grading(Q):
    K = Q.target
    M = Q.matrix
    out = {
        "rank": K.rank,
        "torsion_orders": [fmt_int(d) for d in K.torsion_orders],
        "free_rows": [[fmt_int(x) for x in row] for row in M[: K.rank]],
        "torsion_rows": [[fmt_int(x) for x in row] for row in M[K.rank:]],
    }
    if not M:
        out["nvars"] = Q.source_rank
    return out


def dump_relation(f):
    if f is None:
        return []
    return [{"coeff": fmt_rational(c), "exponents": [fmt_int(e) for e in exp]} for exp, c in f.terms]


def dump_attestations(a):
    return {
        "generators": [i + 1 for i in sorted(a.generators)],
        "relation_prime": a.relation_prime,
        "factorially_graded": a.factorially_graded,
    }


def dump_script(steps):
    out = []
    for kind, arg, att in steps:
        if kind == "subdivide_at":
            d = {"subdivide_at": [fmt_int(x) for x in arg]}
        elif kind == "contract":
            d = {"contract": arg + 1}
        else:
            d = {"retarget_chamber": [fmt_int(x) for x in arg]}
        if att:
            d["attest_prime"] = True
        out.append(d)
    return out


def dump_input(doc):
    out = {
        "format_version": doc.format_version,
        "grading": dump_grading(doc.pres.grading),
        "relation": dump_relation(doc.pres.relation),
        "attestations": dump_attestations(doc.pres.attestations),
    }
    if doc.bunch_cones is not None:
        out["bunch"] = {"cones": [sorted(i + 1 for i in c) for c in doc.bunch_cones]}
    else:
        out["bunch"] = {"chamber_point": [fmt_int(x) for x in doc.chamber_point]}
    if doc.ambient_P is not None or doc.ambient_chamber_point is not None:
        amb = {}
        if doc.ambient_P is not None:
            amb["P"] = [[fmt_int(x) for x in row] for row in doc.ambient_P]
        if doc.ambient_chamber_point is not None:
            amb["chamber_point"] = [fmt_int(x) for x in doc.ambient_chamber_point]
        out["ambient"] = amb
    if doc.script:
        out["script"] = dump_script(doc.script)
    return out


def bunch_as_index_sets(B):
    """Express each bunch cone as the set of weights it is generated by (1-based)."""
    Q = B.grading
    out = []
    for tau in B.bunch:
        idx = [i for i in range(Q.source_rank) if tau.contains(Q.free_column(i))]
        if projected_cone(Q, idx) != tau:
            raise ValidationError(f"{tau} is not spanned by weights")
        gens = set()
        # keep only weights on the extremal rays, enough to span tau
        for ray in tau.rays:
            gens.update(i for i in idx if _on_ray(Q.free_column(i), ray))
        out.append(frozenset(gens))
    return out


def _on_ray(w, ray):
    return any(w) and primitive(w) == tuple(ray)


def document_for(B, P=None, eta_point=None):
    """An input document reproducing the bunched ring ``B``."""
    return InputDocument(
        B.pres,
        bunch_as_index_sets(B),
        None,
        [list(row) for row in P] if P is not None else None,
        tuple(eta_point) if eta_point is not None else None,
    )


def dump_element(w):
    d = {"free": [fmt_int(x) for x in w.free]}
    if w.torsion:
        d["torsion"] = [fmt_int(x) for x in w.torsion]
    return d


def dump_cone(c):
    if c is None:
        return None
    return {"rays": [[fmt_int(x) for x in r] for r in c.rays], "lines": [[fmt_int(x) for x in l] for l in c.lines]}


def dump_index(idx):
    return "infinite" if idx == INFINITE else fmt_int(idx)


def dump_subgroup(S):
    return {
        "basis": [[fmt_int(x) for x in b] for b in S.basis],
        "index": dump_index(S.index()),
        "text": str(S),
    }


def dump_fan(F):
    return {
        "rays": [[fmt_int(x) for x in r] for r in F.rays],
        "maximal_cones": [sorted(i + 1 for i in c) for c in F.cones],
    }


def dump_status(s):
    return {"status": s.status, "reason": s.reason}


def dump_report(R):
    cones = R.cones
    can = R.canonical
    return {
        "dimension": R.dimension,
        "class_group": {"rank": R.class_group.rank, "torsion_orders": list(R.class_group.torsion_orders), "text": str(R.class_group)},
        "cones": {
            "effective": dump_cone(cones.eff),
            "movable": dump_cone(cones.mov),
            "semiample": dump_cone(cones.samp),
            "ample_closure": dump_cone(cones.ample),
            "ample_is_open": cones.ample_is_open,
        },
        "picard": dump_subgroup(R.picard),
        "canonical_class": dump_element(can.canonical),
        "anticanonical_class": dump_element(can.anticanonical),
        "flags": {
            "q_factorial": R.q_factorial,
            "q_gorenstein": can.q_gorenstein,
            "gorenstein": can.gorenstein,
            "q_fano": can.q_fano,
            "fano": can.fano,
            "combinatorially_minimal": R.combinatorially_minimal,
            "projective": R.projective,
            "quasiprojective": R.quasiprojective,
        },
        "relevant_faces": [sorted(i + 1 for i in g) for g in R.rlv],
        "covering_collection": [sorted(i + 1 for i in g) for g in R.cov],
        "strata": [
            {
                "face": sorted(i + 1 for i in s.face),
                "local_class_lattice": dump_subgroup(s.local_class_lattice),
                "factorial": s.is_factorial,
                "q_factorial": s.is_q_factorial,
                "smooth": "unknown" if s.is_smooth is None else s.is_smooth,
                "description": s.description,
            }
            for s in R.strata
        ],
        "primality": {
            "generators": [dump_status(s) for s in R.primality["generators"]],
            "relation": dump_status(R.primality["relation"]),
            "factorially_graded": dump_status(R.primality["factorially_graded"]),
        },
        "notes": list(R.notes),
    }


def dump_chamber_fan(CF):
    return {"source": CF.source, "count": len(CF.chambers), "chambers": [dump_cone(c) for c in CF.chambers]}


def dump_record(rec, state=None):
    d = {
        "kind": rec.kind,
        "index": rec.index + 1 if rec.index is not None else None,
        "before": dump_input(document_for(rec.before)),
        "after": dump_input(document_for(rec.after)),
    }
    if rec.stellar is not None:
        sd = rec.stellar
        d["stellar"] = {
            "sigma0": [i + 1 for i in sd.sigma0],
            "v_inf": [fmt_int(x) for x in sd.v_inf],
            "a": [fmt_int(x) for x in sd.a],
            "m_inf": fmt_int(sd.m_inf),
        }
    if rec.exceptional_weight is not None:
        d["exceptional_weight"] = dump_element(rec.exceptional_weight)
    if rec.chambers:
        d["chambers"] = [dump_cone(c) for c in rec.chambers]
    notes = {}
    for k, v in rec.notes.items():
        if k == "admissibility":
            notes[k] = {
                "admissible": v.admissible,
                "meets_torus_orbit": v.meets_torus_orbit,
                "k0": v.k0,
                "g_k0": str(v.g_k0),
                "primality": dump_status(v.primality),
            }
        elif isinstance(v, GradedPoly):
            notes[k] = str(v)
        elif k == "sigma0":
            notes[k] = [i + 1 for i in v]
        else:
            notes[k] = v
    d["notes"] = notes
    return d


def fmt_faces(faces):
    return ", ".join(fmt_face(g) for g in faces)


__all__ = [
    "InputDocument",
    "load_input",
    "load_input_path",
    "load_script_path",
    "parse_input",
    "dump_input",
    "dump_report",
    "dump_chamber_fan",
    "dump_record",
    "dump_fan",
    "document_for",
    "Cone",
]
