import json
from fractions import Fraction

import pytest

from linlogic import format_structure, load_corpus
from linlogic.cli import main
from linlogic.corpus import NAMES, selftest
from linlogic.report import SCHEMA_KEYS, emit_report, make_report, rational, to_jsonable


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, (json.loads(out) if out else None), err


def test_eval(capsys):
    code, rep, _ = run_json(capsys, "eval", "--corpus", "M2", "--formula", "sup x . P(x)")
    assert code == 0 and rep["results"] == {"value": "1/1"}
    code, rep, _ = run_json(capsys, "eval", "--corpus", "M2", "--formula", "2*P(x) + d(x,c0)",
                            "--assign", "x=a1")
    assert rep["results"]["value"] == "3/1"
    assert list(rep) == list(SCHEMA_KEYS)


def test_input_errors_exit_2(capsys):
    code, out, err = run(capsys, "eval", "--corpus", "M2", "--formula", "Q(x)")
    assert code == 2 and "unknown-symbol" in err and not out
    assert run(capsys, "eval", "--corpus", "nowhere", "--formula", "1")[0] == 2
    assert run(capsys, "eval", "--formula", "1")[0] == 2
    assert run(capsys, "typespace", "--corpus", "M2", "--fragment", "listed")[0] == 2
    assert run(capsys, "suite", "no-such-suite")[0] == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_validate(capsys, tmp_path):
    good = tmp_path / "m2.txt"
    good.write_text(format_structure(load_corpus("M2").structure))
    code, rep, _ = run_json(capsys, "validate", "--file", str(good))
    assert code == 0 and rep["results"]["valid"] is True
    bad = tmp_path / "bad.txt"
    bad.write_text(good.read_text().replace("1 0\n", "1/2 0\n"))
    code, rep, _ = run_json(capsys, "validate", "--file", str(bad))
    assert code == 2
    v = rep["results"]["violations"][0]
    assert v["axiom"] == "relation-lipschitz" and v["witness"] == ["P", ["a0"], ["a1"]]
    code, _, err = run(capsys, "eval", "--file", str(bad), "--formula", "1")
    assert code == 2 and "relation-lipschitz" in err


def test_face_dc3(capsys):
    code, rep, _ = run_json(capsys, "face", "--corpus", "DC3", "--gamma",
                            "d(x,k0)=1; d(x,k1)=1; d(x,k2)=1")
    assert code == 0
    assert rep["results"]["verdict"] == "face" and rep["results"]["certificate_verified"]
    assert rep["results"]["vertices"] == [{"vector": ["1/1", "1/1", "1/1"], "realizers": ["b3"]}]
    cert = rep["certificates"][0]
    assert cert["kind"] == "supporting-functional" and cert["functional"]
    assert set(rep["fragment"]) >= {"contexts", "dims", "saturated"}


def test_face_expect(capsys):
    argv = ["face", "--corpus", "U2", "--gamma", "P(x) <= 1/2"]
    code, rep, _ = run_json(capsys, *argv)
    assert code == 0 and rep["results"]["verdict"] == "not-face"
    cert = rep["certificates"][0]
    assert cert["kind"] == "excluded-endpoint" and cert["excluded"] == ["1/1"]
    assert cert["point"] == ["1/2"]
    assert run(capsys, *argv, "--expect")[0] == 1


def test_listed_typespace(capsys):
    code, rep, _ = run_json(capsys, "typespace", "--corpus", "U2", "--fragment", "listed",
                            "--basis", "P(x); d(x, c0)")
    vecs = sorted(tuple(v["vector"]) for v in rep["results"]["vectors"])
    assert vecs == [("0/1", "0/1"), ("1/1", "1/1"), ("1/2", "1/2")]
    code, rep, _ = run_json(capsys, "extreme", "--corpus", "U2", "--fragment", "listed",
                            "--basis", "P(x); d(x, c0)")
    assert rep["results"]["realized"] == 3 and len(rep["results"]["extreme"]) == 2


def test_type_metric_and_sigma(capsys):
    code, rep, _ = run_json(capsys, "type-metric", "--corpus", "U2", "--a", "[a0a0]", "--b", "[a0a1]")
    assert rep["results"]["distance"] == "1/2"
    code, rep, _ = run_json(capsys, "sigma-face", "--corpus", "U2", "--a", "[a0a0]", "--b", "[a1a1]",
                            "--expect")
    assert code == 0 and rep["results"]["verdict"] == "face" and rep["results"]["marginals_ok"]


def test_submodel_commands(capsys):
    code, rep, _ = run_json(capsys, "elementary", "--corpus", "M2", "--subset", "a0")
    assert code == 0 and rep["results"]["elementary"] is False
    assert run(capsys, "elementary", "--corpus", "M2", "--subset", "a0", "--expect")[0] == 1
    assert run(capsys, "elementary", "--corpus", "M2", "--subset", "a1")[0] == 2   # not closed
    code, rep, _ = run_json(capsys, "closure", "--corpus", "C8", "--seeds", "p0")
    assert rep["results"]["size"] == 8 and rep["results"]["steps"][0]["added"] == ["p4"]
    code, rep, _ = run_json(capsys, "minimal", "--corpus", "U2")
    assert rep["results"]["points"] == ["[a0a0]", "[a1a1]"]
    code, rep, _ = run_json(capsys, "extremal", "--corpus", "U2", "--expect")
    assert code == 1 and rep["results"]["witness"]["tuple"] == ["[a0a1]"]


def test_ultramean_and_los(capsys):
    code, rep, _ = run_json(capsys, "ultramean", "--factors", "M2,M2", "--weights", "1/2,1/2")
    assert rep["results"]["points"] == ["[a0a0]", "[a0a1]", "[a1a0]", "[a1a1]"]
    assert rep["results"]["relations"]["P"]["[a0a1]"] == "1/2"
    code, rep, _ = run_json(capsys, "los-check", "--factors", "M2,M2", "--formula", "P(x)",
                            "--assign", "x=a0.a1")
    assert code == 0 and rep["results"] == {"lhs": "1/2", "rhs": "1/2", "equal": True}
    code, rep, _ = run_json(capsys, "los-check", "--factors", "M2,U2,M2", "--cases", "50", "--seed", "3")
    assert code == 0 and rep["results"]["failures"] == 0
    assert run(capsys, "ultramean", "--factors", "M2,M2", "--weights", "1/2,1/3")[0] == 2


def test_suites(capsys):
    code, rep, _ = run_json(capsys, "suite", "restriction-extreme", "--cases", "10", "--seed", "7")
    assert code == 0 and rep["counterexamples"] == [] and rep["results"]["cases"] == 10
    code, rep, _ = run_json(capsys, "suite", "over-symmetry", "--corpus", "U2", "--cases", "0")
    assert code == 1 and rep["counterexamples"]
    code, rep, _ = run_json(capsys, "suite", "sigma-face", "--corpus", "M2,DC3", "--cases", "0")
    assert code == 0


def test_corpus_command(capsys):
    code, rep, _ = run_json(capsys, "corpus", "--selftest")
    assert code == 0
    assert [e["name"] for e in rep["results"]["entries"]] == list(NAMES)
    assert all(e["selftest"] == "ok" for e in rep["results"]["entries"])


def test_determinism(capsys):
    argv = ["typespace", "--corpus", "DC3", "--n", "2", "--seed", "5"]
    _, a, _ = run_json(capsys, *argv)
    _, b, _ = run_json(capsys, *argv)
    a.pop("timing_ms"), b.pop("timing_ms")
    assert json.dumps(a) == json.dumps(b)


def test_out_file_and_table(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "eval", "--corpus", "M2", "--formula", "1/3", "--json", "--out", str(out))
    assert json.loads(out.read_text())["results"]["value"] == "1/3"
    code, stdout, _ = run(capsys, "face", "--corpus", "DC3", "--gamma", "d(x,k0)=1; d(x,k1)=1; d(x,k2)=1")
    assert stdout.startswith("command: face") and "supporting-functional" in stdout


def test_float_mode_flag(capsys):
    code, rep, _ = run_json(capsys, "eval", "--corpus", "M2", "--mode", "float", "--formula", "1/2 * P(x)",
                            "--assign", "x=a1")
    assert rep["results"]["value"] == 0.5


@pytest.mark.parametrize("name", NAMES)
def test_corpus_selftest(name):
    assert selftest(load_corpus(name)) == []


def test_corpus_facts():
    U2 = load_corpus("U2").structure
    assert sorted(U2.relations["P"].values()) == [0, Fraction(1, 2), Fraction(1, 2), 1]
    assert load_corpus("singleton").structure.size == 1
    with pytest.raises(KeyError):
        load_corpus("M3")
    assert load_corpus("M2") is load_corpus("M2")


def test_report_helpers():
    assert rational(Fraction(3)) == "3/1" and rational(Fraction(-1, 2)) == "-1/2"
    assert to_jsonable({"a": (Fraction(1, 2), 0.5, True)}) == {"a": ["1/2", 0.5, True]}
    rep = make_report("x", results={"value": Fraction(2)})
    assert json.loads(emit_report(rep, "json"))["results"]["value"] == "2/1"
    assert emit_report(rep).startswith("command: x")
