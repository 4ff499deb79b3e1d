import io
import json
from fractions import Fraction

import jsonschema
import pytest

from bunchctl.cli import EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_VALIDATION, compare_documents, main
from bunchctl.errors import ParseError
from bunchctl.io import (
    document_for,
    dump_input,
    fmt_int,
    fmt_rational,
    load_input,
    load_input_path,
    parse_input,
    parse_int,
    parse_rational,
)

from conftest import DELPEZZO_P, FIXTURES, delpezzo_ring

DOCS = sorted(p for p in FIXTURES.glob("*.json") if p.name != "contract_script.json")
SCHEMA = json.loads((FIXTURES.parent / "docs" / "input-schema.json").read_text())


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return p


# scalars


def test_integer_and_rational_encoding():
    assert fmt_int(5) == 5 and fmt_int(2**60) == str(2**60)
    assert parse_int(str(2**60)) == 2**60
    assert fmt_rational(Fraction(-3, 4)) == "-3/4" and fmt_rational(Fraction(6, 3)) == "2"
    assert parse_rational("-3/4") == Fraction(-3, 4)
    for bad in (True, 1.5, "x"):
        with pytest.raises(ParseError):
            parse_int(bad)
    with pytest.raises(ParseError):
        parse_rational("1/0")


# documents


@pytest.mark.parametrize("path", DOCS, ids=lambda p: p.stem)
def test_fixture_round_trip(path):
    doc = load_input_path(path)
    again = parse_input(json.loads(json.dumps(dump_input(doc))))
    assert again == doc


@pytest.mark.parametrize("path", DOCS, ids=lambda p: p.stem)
def test_fixtures_satisfy_schema(path):
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)
    jsonschema.validate(dump_input(load_input_path(path)), SCHEMA)


def test_document_for_reconstructs_bunch():
    B = delpezzo_ring()
    doc = parse_input(dump_input(document_for(B, DELPEZZO_P)))
    assert doc.build_bunch(20) == B
    assert doc.ambient_P == DELPEZZO_P


def test_unknown_top_level_key():
    data = json.loads((FIXTURES / "p2.json").read_text())
    data["colour"] = "blue"
    with pytest.raises(ParseError, match="colour"):
        parse_input(data)


def test_json_error_position():
    with pytest.raises(ParseError) as e:
        load_input('{\n  "grading": [1,\n}')
    assert e.value.line == 3


def test_relation_as_string():
    data = json.loads((FIXTURES / "delpezzo.json").read_text())
    data["relation"] = "T1*T2 + T3^2 + T4*T5"
    assert parse_input(data) == load_input_path(FIXTURES / "delpezzo.json")


# command line


def test_analyze_delpezzo():
    code, out, _ = run("analyze", FIXTURES / "delpezzo.json")
    assert code == EXIT_OK
    rep = json.loads(out)["report"]
    assert rep["dimension"] == 2
    assert rep["picard"]["index"] == 3
    assert rep["canonical_class"]["free"] == [0, -3]
    assert rep["flags"]["fano"] is True
    assert sorted(rep["covering_collection"]) == [[1, 2, 3], [1, 4], [2, 5], [3, 4, 5]]
    bad = [s["face"] for s in rep["strata"] if not s["factorial"]]
    assert bad == [[2, 5]]


def test_analyze_text_mode():
    code, out, _ = run("analyze", FIXTURES / "torsion.json", "--text")
    assert code == EXIT_OK
    assert "class group: Z + Z/3" in out and "index 9" in out


@pytest.mark.parametrize("flag,count", [(None, 3), ("--toric", 4)])
def test_gitfan_counts(flag, count):
    args = ["gitfan", FIXTURES / "delpezzo.json"] + ([flag] if flag else [])
    code, out, _ = run(*args)
    assert code == EXIT_OK and json.loads(out)["chamber_fan"]["count"] == count


def test_gitfan_one_dimensional():
    code, out, _ = run("gitfan", FIXTURES / "p2.json")
    assert code == EXIT_OK and json.loads(out)["chamber_fan"]["count"] == 1


def test_modify_resolution_script():
    code, out, _ = run("modify", FIXTURES / "delpezzo_resolution.json")
    assert code == EXIT_OK
    res = json.loads(out)
    r1, r2 = res["records"]
    assert r1["stellar"]["sigma0"] == [1, 3, 4] and r1["stellar"]["m_inf"] == 3
    assert r1["notes"]["pullback"] == "T3^2*T6^3 + T1*T2 + T4*T5"
    assert r1["notes"]["relation"] == "T3^2*T6 + T1*T2 + T4*T5"
    assert r2["stellar"]["sigma0"] == [1, 4, 6] and r2["stellar"]["m_inf"] == 2
    assert all(s["factorial"] for s in res["final"]["report"]["strata"])


def test_modify_with_external_script():
    code, out, _ = run("modify", FIXTURES / "delpezzo.json", "--script", FIXTURES / "contract_script.json")
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["records"][0]["kind"] == "contraction" and res["records"][0]["index"] == 4
    assert res["final"]["report"]["flags"]["combinatorially_minimal"] is True


def test_reduce_commands():
    code, out, _ = run("reduce", FIXTURES / "delpezzo.json")
    assert code == EXIT_OK and json.loads(out)["steps"] == 1
    code, out, _ = run("reduce", FIXTURES / "delpezzo.json", "--target", 4)
    res = json.loads(out)
    assert res["minimal"] and res["records"][0]["index"] == 4
    code, out, _ = run("reduce", FIXTURES / "p2.json")
    assert json.loads(out)["steps"] == 0


def test_reduce_inadmissible_fixture():
    code, out, _ = run("reduce", FIXTURES / "inadmissible_contraction.json")
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["steps"] == 0 and res["minimal"] is False
    assert "g_k0 = T3*T4 is a monomial" in res["diagnostic"]


def test_compare_against_explicit_ambient(tmp_path):
    data = json.loads((FIXTURES / "delpezzo.json").read_text())
    data["ambient"] = {"P": DELPEZZO_P}
    other = write(tmp_path, "with_p.json", data)
    code, out, _ = run("compare", FIXTURES / "delpezzo.json", other)
    assert code == EXIT_OK
    res = json.loads(out)
    assert res["equivalent"] is True and res["U"] is not None
    # the certificate maps one kernel basis onto the other
    a = load_input_path(FIXTURES / "delpezzo.json")
    b = load_input_path(other)
    assert compare_documents(a, b)["kernel_lattices_equal"]


def test_compare_detects_different_relations(tmp_path):
    data = json.loads((FIXTURES / "delpezzo.json").read_text())
    data["relation"] = "T1*T2 + 2*T3^2 + T4*T5"
    other = write(tmp_path, "scaled.json", data)
    res = json.loads(run("compare", FIXTURES / "delpezzo.json", other)[1])
    assert res["relations_equal"] is False and res["equivalent"] is False


# exit codes


def test_exit_parse_error_reports_position(tmp_path):
    p = write(tmp_path, "bad.json", '{\n  "grading": {"rank": 1,\n')
    code, _, err = run("analyze", p)
    assert code == EXIT_PARSE
    e = json.loads(err)["error"]
    assert e["kind"] == "parse" and e["line"] >= 2


def test_exit_validation_error(tmp_path):
    data = json.loads((FIXTURES / "delpezzo.json").read_text())
    data["bunch"] = {"cones": [[4, 2], [1, 5]]}
    code, _, err = run("analyze", write(tmp_path, "v.json", data))
    assert code == EXIT_VALIDATION
    e = json.loads(err)["error"]
    assert e["kind"] == "validation" and any("disjoint" in d for d in e["diagnostics"])


def test_exit_unsupported_size(tmp_path):
    code, _, err = run("analyze", FIXTURES / "delpezzo.json", "--max-vars", 3)
    assert code == EXIT_UNSUPPORTED
    assert json.loads(err)["error"]["kind"] == "unsupported"


def test_exit_unsupported_multiple_relations(tmp_path):
    data = {
        "format_version": 1,
        "grading": {"rank": 1, "free_rows": [[1, 1, 1, 1]]},
        "relation": ["T1*T2 + T3*T4", "T1^2 + T2^2"],
        "bunch": {"chamber_point": [1]},
    }
    jsonschema.validate(data, SCHEMA)
    code, _, err = run("analyze", write(tmp_path, "m.json", data), "--text")
    assert code == EXIT_UNSUPPORTED
    assert "multi-relation" in err


def test_single_relation_in_a_list():
    data = json.loads((FIXTURES / "delpezzo.json").read_text())
    data["relation"] = [data["relation"]]
    assert parse_input(data) == load_input_path(FIXTURES / "delpezzo.json")
