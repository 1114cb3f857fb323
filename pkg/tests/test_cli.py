import csv
import io
import json
from pathlib import Path

import pytest

from prtower.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds_table(capsys):
    code, out, _ = run(capsys, "bounds", "--p", "5", "--k", "4", "--e", "1", "--n-max", "3")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [(r["n"], r["new_exponent"], r["laurent_exponent"]) for r in rows[:2]] == [(1, 13, 12), (2, 33, 100)]


def test_bounds_k2_laurent_zero(capsys):
    code, out, _ = run(capsys, "bounds", "--p", "3", "--k", "2", "--n-max", "2", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["laurent_exponent"] for r in rows] == ["0", "0"]


def test_bounds_empty_range(capsys):
    code, out, _ = run(capsys, "bounds", "--p", "5", "--k", "4", "--n-max", "0", "--format", "csv")
    assert code == 0
    assert out.strip() == "p,k,e,n,new_exponent,laurent_exponent,winner"


def test_bounds_bad_weight(capsys):
    code, _, err = run(capsys, "bounds", "--p", "5", "--k", "3")
    assert code == 2 and "even" in err


def test_lemmas(capsys):
    code, out, _ = run(capsys, "lemmas", "--p", "3", "--n-max", "3")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"lemma_A1_check", "lemma_A2_check", "lemma_A3_check"}


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", str(DATA / "rank1.json"))
    assert code == 0
    doc = json.loads(out)
    res = doc["solve"]["residual_valuation"]
    assert res == "inf" or res >= doc["solve"]["N"] - 2
    assert all(doc["checks"].values())


def test_qsystem(capsys):
    code, out, _ = run(capsys, "qsystem", str(DATA / "modular_q.json"))
    assert code == 0
    doc = json.loads(out)
    assert all(doc["verify"]["trace_step_ok"].values()) and doc["verify"]["q_relation_ok"]["1"]


def test_wach(capsys, tmp_path):
    target = tmp_path / "wach.json"
    code, out, _ = run(capsys, "wach", str(DATA / "wach_antidiagonal.json"), "--out", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["cor43_check"] == {"1": True, "2": True}


def test_wach_divergence_exits_1(capsys):
    code, out, _ = run(capsys, "wach", str(DATA / "wach_divergent.json"))
    assert code == 1
    assert "diverged" in json.loads(out)


def test_mellin(capsys):
    code, out, _ = run(capsys, "mellin", "--p", "3", "--precision", "20", "--omega", "1", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["divisibility"]["n=2,m=0"] and not doc["divisibility"]["n=2,m=1"]


@pytest.mark.parametrize("content", ["{not json", "[1, 2]", '{"module": {"p": 3}}'])
def test_malformed_instances_exit_2(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, _, err = run(capsys, "solve", str(path))
    assert code == 2 and err.startswith("error:")


def test_prime_mismatch(capsys):
    code, _, err = run(capsys, "solve", str(DATA / "rank1.json"), "--p", "5")
    assert code == 2 and "does not match" in err


def test_missing_file(capsys):
    code, _, _ = run(capsys, "solve", "/nonexistent/instance.json")
    assert code == 2


def test_deterministic_in_process(capsys):
    first = run(capsys, "solve", str(DATA / "rank1.json"))
    second = run(capsys, "solve", str(DATA / "rank1.json"))
    assert first == second
