"""``bunchctl`` command line front end.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 unsupported input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bunch import DEFAULT_MAX_VARS, default_ambient_chamber, fmt_face, git_cone
from .cones import unimodular_equivalence
from .errors import BunchError, ParseError, UnsupportedError, ValidationError
from .geometry import variety_report
from .io import (
    FORMAT_VERSION,
    document_for,
    dump_chamber_fan,
    dump_fan,
    dump_input,
    dump_record,
    dump_report,
    load_input_path,
    load_script_path,
)
from .modify import ModelState, ModificationRecord, blow_up, contract, reduce_to_minimal, same_up_to_unit, small_transform

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_UNSUPPORTED = 0, 2, 3, 4


# commands return (json document, text lines)


def _initial_state(doc, B):
    eta = None
    if doc.ambient_chamber_point is not None:
        eta = git_cone(doc.ambient_chamber_point, B.toric_orbit_cone_set)
    return ModelState.initial(B, doc.ambient_P, eta)


def _report_text(R):
    c = R.cones
    can = R.canonical
    lines = [
        f"dimension: {R.dimension}",
        f"class group: {R.class_group}",
        f"effective cone: {c.eff}",
        f"moving cone: {c.mov}",
        f"semiample cone: {c.samp}",
        f"ample cone: {'interior of ' + str(c.ample) if c.ample is not None else 'empty'}",
        f"Picard group: {R.picard}",
        f"canonical class: {can.canonical}",
        "flags: "
        + ", ".join(
            f"{k}={v}"
            for k, v in [
                ("q_factorial", R.q_factorial),
                ("q_gorenstein", can.q_gorenstein),
                ("gorenstein", can.gorenstein),
                ("q_fano", can.q_fano),
                ("fano", can.fano),
                ("combinatorially_minimal", R.combinatorially_minimal),
                ("projective", R.projective),
            ]
        ),
        "covering collection: " + ", ".join(fmt_face(g) for g in R.cov),
        "strata:",
    ]
    for s in R.strata:
        smooth = "unknown" if s.is_smooth is None else s.is_smooth
        lines.append(
            f"  {fmt_face(s.face)}: factorial={s.is_factorial} q_factorial={s.is_q_factorial} "
            f"smooth={smooth} local index {s.local_index}"
        )
    lines += [f"note: {n}" for n in R.notes]
    return lines


def cmd_analyze(doc, args):
    B = doc.build_bunch(args.max_vars)
    R = variety_report(B)
    return {"command": "analyze", "input": dump_input(doc), "report": dump_report(R)}, _report_text(R)


def cmd_gitfan(doc, args):
    B = doc.build_bunch(args.max_vars)
    CF = B.toric_chamber_fan if args.toric else B.ring_chamber_fan
    text = [f"{CF.source} GIT fan: {len(CF.chambers)} full-dimensional chamber(s)"]
    text += [f"  {c}" for c in CF.chambers]
    return {"command": "gitfan", "chamber_fan": dump_chamber_fan(CF)}, text


def _presentation_text(B):
    Q = B.grading
    lines = ["grading matrix:"] + ["  " + " ".join(f"{x:>3}" for x in row) for row in Q.matrix]
    lines.append(f"grading group: {Q.target}")
    lines.append(f"relation: {B.pres.relation if not B.pres.is_toric else 'none'}")
    lines.append("bunch: " + ", ".join(str(t) for t in B.bunch))
    return lines


def _record_text(rec):
    head = f"{rec.kind}"
    if rec.index is not None:
        head += f" w{rec.index + 1}"
    out = [head]
    if rec.stellar is not None:
        sd = rec.stellar
        out.append(f"  sigma0 {fmt_face(sd.sigma0)}, v = {sd.v_inf}, index {sd.m_inf}")
    for k in ("pullback", "relation"):
        if k in rec.notes:
            out.append(f"  {k}: {rec.notes[k]}")
    return out


def _final(state):
    return {
        "presentation": dump_input(document_for(state.bunch, state.P)),
        "ambient_fan": dump_fan(state.fan),
        "report": dump_report(variety_report(state.bunch)),
    }


def cmd_modify(doc, args):
    steps = load_script_path(args.script) if args.script else doc.script
    B = doc.build_bunch(args.max_vars)
    state = _initial_state(doc, B)
    records = []
    for kind, arg, attest in steps:
        if kind == "subdivide_at":
            state, rec = blow_up(state, arg, attest)
        elif kind == "contract":
            state, rec = contract(state, arg, attest)
        else:
            Bc = state.bunch
            lam = git_cone(arg, Bc.orbit_cone_set)
            B2 = small_transform(Bc, lam)
            rec = ModificationRecord("small_transform", Bc, B2, chambers=(lam,))
            state = ModelState(B2, state.P, default_ambient_chamber(B2))
        records.append(rec)
    fin = _final(state)
    text = []
    for rec in records:
        text += _record_text(rec)
    text += ["final model:"] + _presentation_text(state.bunch)
    text.append(f"combinatorially minimal: {fin['report']['flags']['combinatorially_minimal']}")
    return {"command": "modify", "records": [dump_record(r) for r in records], "final": fin}, text


def cmd_reduce(doc, args):
    B = doc.build_bunch(args.max_vars)
    state = _initial_state(doc, B)
    targets = [t - 1 for t in args.target] if args.target else None
    red = reduce_to_minimal(B, targets=targets, state=state)
    text = [f"{len(red.records)} step(s)"]
    for rec in red.records:
        text += _record_text(rec)
    text += ["final model:"] + _presentation_text(red.final.bunch)
    text.append(f"minimal: {red.minimal}")
    if red.diagnostic:
        text.append(f"diagnostic: {red.diagnostic}")
    out = {
        "command": "reduce",
        "steps": len(red.records),
        "records": [dump_record(r) for r in red.records],
        "minimal": red.minimal,
        "diagnostic": red.diagnostic,
        "final": _final(red.final),
    }
    return out, text


def compare_documents(doc_a, doc_b, max_vars=DEFAULT_MAX_VARS):
    """Equivalence certificate for two presentations on the same variables.

    The ambient matrices (given or computed) are compared through an integer
    unimodular ``U`` with ``U Pa = Pb``; the fans are then compared after
    transporting the rays of the first one by ``U``.
    """
    Ba = doc_a.build_bunch(max_vars)
    Bb = doc_b.build_bunch(max_vars)
    sa = _initial_state(doc_a, Ba)
    sb = _initial_state(doc_b, Bb)
    out = {"same_nvars": Ba.nvars == Bb.nvars}
    U = unimodular_equivalence(sa.P, sb.P) if out["same_nvars"] else None
    out["kernel_lattices_equal"] = U is not None
    out["U"] = U
    if U is not None:
        fa, fb = sa.fan, sb.fan
        moved = [tuple(sum(U[i][k] * v[k] for k in range(len(v))) for i in range(len(U))) for v in fa.rays]
        out["fans_equal"] = tuple(moved) == tuple(fb.rays) and fa.cones == fb.cones
        out["relevant_faces_equal"] = set(Ba.rlv) == set(Bb.rlv)
    else:
        out["fans_equal"] = out["relevant_faces_equal"] = False
    fa_rel, fb_rel = Ba.pres.relation, Bb.pres.relation
    if fa_rel is None or fb_rel is None:
        out["relations_equal"] = fa_rel is None and fb_rel is None
    else:
        out["relations_equal"] = fa_rel.nvars == fb_rel.nvars and same_up_to_unit(fa_rel, fb_rel)
    out["equivalent"] = all(out[k] for k in ("kernel_lattices_equal", "fans_equal", "relevant_faces_equal", "relations_equal"))
    return out


def cmd_compare(doc, args):
    other = load_input_path(args.other)
    res = compare_documents(doc, other, args.max_vars)
    text = [f"{k}: {v}" for k, v in res.items()]
    return {"command": "compare", **res}, text


COMMANDS = {
    "analyze": cmd_analyze,
    "gitfan": cmd_gitfan,
    "modify": cmd_modify,
    "reduce": cmd_reduce,
    "compare": cmd_compare,
}


def build_parser():
    p = argparse.ArgumentParser(prog="bunchctl", description="Bunched rings, their varieties and Cox ring modifications.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("file", help="input document (JSON)")
    p.add_argument("other", nargs="?", help="second document for compare")
    side = p.add_mutually_exclusive_group()
    side.add_argument("--ring", action="store_true", help="GIT fan of the total coordinate space (default)")
    side.add_argument("--toric", action="store_true", help="GIT fan of the ambient affine space")
    p.add_argument("--script", help="modification script (JSON list of steps)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="machine-readable output (default)")
    fmt.add_argument("--text", action="store_true", help="human-readable output")
    p.add_argument("--max-vars", type=int, default=DEFAULT_MAX_VARS, help="refuse face enumeration above this many variables")
    p.add_argument("--target", type=int, action="append", help="reduce: contract this weight first (1-based, repeatable)")
    return p


def _emit_error(kind, exc, as_text, stream):
    if as_text:
        print(f"error ({kind}): {exc}", file=stream)
        for d in getattr(exc, "diagnostics", []):
            print(f"  {d}", file=stream)
        return
    err = {"kind": kind, "message": str(exc)}
    if isinstance(exc, ParseError) and exc.line is not None:
        err.update(line=exc.line, column=exc.column)
    if getattr(exc, "diagnostics", None):
        err["diagnostics"] = [str(d) for d in exc.diagnostics]
    json.dump({"format_version": FORMAT_VERSION, "error": err}, stream, indent=2)
    stream.write("\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    if args.command == "compare" and not args.other:
        print("compare needs two documents", file=stderr)
        return EXIT_PARSE
    try:
        doc = load_input_path(args.file)
        out, text = COMMANDS[args.command](doc, args)
    except ParseError as e:
        _emit_error("parse", e, args.text, stderr)
        return EXIT_PARSE
    except UnsupportedError as e:
        _emit_error("unsupported", e, args.text, stderr)
        return EXIT_UNSUPPORTED
    except (ValidationError, BunchError) as e:
        _emit_error("validation", e, args.text, stderr)
        return EXIT_VALIDATION
    if args.text:
        stdout.write("\n".join(text) + "\n")
    else:
        json.dump({"format_version": FORMAT_VERSION, **out}, stdout, indent=2)
        stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
