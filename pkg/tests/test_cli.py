import json
import re
import subprocess
import sys

import numpy as np
import pytest

from stlpi.benchmarks import ProblemError, builtin_document, problem_i
from stlpi.cli import RunRecord, apply_override, main, read_csv, write_csv
from stlpi.stl import satisfies

FAST = ["--set", "J=6", "--set", "M=300"]


def run(tmp_path, *args):
    return main(["run", *args, "--out", str(tmp_path)])


def record(tmp_path, name="problem_i"):
    return RunRecord.from_json((tmp_path / f"{name}.json").read_text())


def without_clock(text):
    return re.sub(r'"wall_clock_ms": [^,\n]+', '"wall_clock_ms": 0', text)


def test_run_problem_i_seed_7(tmp_path):
    assert run(tmp_path, "problem_i", "--seed", "7") == 0
    rec = record(tmp_path)
    assert rec.seed == 7 and rec.problem == "problem_i"
    assert rec.final_robustness >= 0
    assert len(rec.states) == 11 and len(rec.inputs) == 10
    assert len(rec.iterations) == 19
    assert rec.satisfied == satisfies(problem_i().formula, np.array(rec.states))


def test_run_rejects_zero_iterations(tmp_path, capsys):
    assert run(tmp_path, "problem_i", "--set", "J=0") == 1
    assert "J must be a positive integer" in capsys.readouterr().err


@pytest.mark.parametrize("args", [["nope"], ["problem_i", "--set", "J"], ["problem_i", "--set", "bogus.key=1"]])
def test_run_errors(tmp_path, args):
    assert run(tmp_path, *args) == 1


def test_run_unsatisfiable_exits_2(tmp_path):
    doc = builtin_document("problem_i")
    doc["name"] = "impossible"
    doc["formula"] = "G[0,10](gate) & G[0,10](!gate)"
    path = tmp_path / "impossible.json"
    path.write_text(json.dumps(doc))
    assert run(tmp_path, str(path), *FAST) == 2
    assert record(tmp_path, "impossible").satisfied is False


def test_record_roundtrip(tmp_path):
    run(tmp_path, "problem_i", *FAST)
    text = (tmp_path / "problem_i.json").read_text()
    rec = RunRecord.from_json(text)
    assert rec.to_json() == text
    assert rec.config["solver"]["J"] == 6


def test_repeat_runs_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(a, "problem_ii", "--set", "J=5", "--seed", "3")
    run(b, "problem_ii", "--set", "J=5", "--seed", "3")
    assert without_clock((a / "problem_ii.json").read_text()) == without_clock((b / "problem_ii.json").read_text())
    assert (a / "problem_ii.csv").read_bytes() == (b / "problem_ii.csv").read_bytes()


def test_eval_reproduces_recorded_robustness(tmp_path, capsys):
    run(tmp_path, "problem_i", "--seed", "2")
    rec = record(tmp_path)
    capsys.readouterr()
    assert main(["eval", str(tmp_path / "problem_i.csv"), "problem_i"]) == 0
    out = capsys.readouterr().out
    assert float(re.search(r"robustness: (\S+)", out).group(1)) == rec.final_robustness


def test_eval_zero_trajectory(tmp_path, capsys):
    path = tmp_path / "zero.csv"
    write_csv(path, np.zeros((11, 1)), np.zeros((10, 1)), 1.0)
    assert main(["eval", str(path), "problem_i"]) == 0
    out = capsys.readouterr().out
    assert "robustness: 1.0\n" in out
    assert "satisfied: true" in out and "boolean check: true" in out


def test_eval_conjunct_breakdown(tmp_path, capsys):
    path = tmp_path / "still.csv"
    write_csv(path, np.tile([2.0, 2.0, 0.0, 0.0], (16, 1)), np.zeros((15, 2)), 1.0)
    main(["eval", str(path), "problem_ii"])
    out = capsys.readouterr().out
    assert "conjunct 0: 7.0" in out  # |(2,2)|^2 - 1
    assert "conjunct 1: -4.0" in out


def test_eval_truncated_csv(tmp_path, capsys):
    path = tmp_path / "t.csv"
    write_csv(path, np.zeros((11, 1)), np.zeros((10, 1)), 1.0)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    assert main(["eval", str(path), "problem_i"]) == 1
    path.write_text("\n".join(lines[:-1] + ["10,10.0"]) + "\n")
    assert main(["eval", str(path), "problem_i"]) == 1
    assert "malformed row" in capsys.readouterr().err


def test_eval_schema_mismatch(tmp_path):
    path = tmp_path / "wide.csv"
    write_csv(path, np.zeros((11, 2)), np.zeros((10, 1)), 1.0)
    assert main(["eval", str(path), "problem_i"]) == 1


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    x, u = rng.normal(size=(6, 4)), rng.normal(size=(5, 2))
    write_csv(tmp_path / "r.csv", x, u, 0.1)
    x2, u2 = read_csv(tmp_path / "r.csv", 4, 2)
    np.testing.assert_array_equal(x, x2)
    np.testing.assert_array_equal(u, u2)
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "k,t,x0,x1,x2,x3,u0,u1"


def test_apply_override():
    doc = builtin_document("problem_i")
    apply_override(doc, "J=3")
    apply_override(doc, "sigma=[[2.0]]")
    apply_override(doc, "mode=maximize_satisfaction")
    apply_override(doc, "predicates.gate.bound=2.5")
    assert doc["solver"]["J"] == 3 and doc["solver"]["sigma"] == [[2.0]]
    assert doc["solver"]["mode"] == "maximize_satisfaction"
    assert doc["predicates"]["gate"]["bound"] == 2.5
    with pytest.raises(ProblemError):
        apply_override(doc, "=1")
    with pytest.raises(ProblemError):
        apply_override(doc, "K.x=1")


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in ("problem_i", "problem_ii", "problem_iii"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stlpi", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "problem_iii" in proc.stdout
