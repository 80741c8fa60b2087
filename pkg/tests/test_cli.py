import json
import random

import pytest
from helpers import CORPUS

from conspd import __version__
from conspd.cli import main
from conspd.parser import parse

ADD = str(CORPUS / "add.mk")
BOOL = str(CORPUS / "bool_first_plain.mk")
NANDO = str(CORPUS / "bool_first_nando.mk")


def test_run_forward(capsys):
    assert main(["run", ADD]) == 0
    out, err = capsys.readouterr()
    assert out.strip() == "z = (succ (succ zero))"
    assert "unify_attempts=" in err and "answers=1" in err


def test_run_backward_bounded(capsys):
    assert main(["run", ADD, "--goal", "(call addo a b (succ (succ (zero))))", "-n", "3"]) == 0
    out, _ = capsys.readouterr()
    lines = out.strip().splitlines()
    assert len(lines) == 3
    assert "a = zero, b = (succ (succ zero))" in lines


def test_run_zero_answers(capsys):
    assert main(["run", ADD, "-n", "0"]) == 0
    out, err = capsys.readouterr()
    assert out == "" and "answers=0" in err


def test_run_budget_exhausted(capsys):
    code = main(["run", BOOL, "-n", "1000", "--budget", "50"])
    out, err = capsys.readouterr()
    assert code == 3 and "budget exhausted" in err


def test_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CONSPD_BUDGET", "50")
    assert main(["run", BOOL, "-n", "1000"]) == 3


def test_run_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["run", ADD, "--csv", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header.startswith("program,variant,answers,found")
    assert row.startswith("add,original,10,1,")


@pytest.mark.parametrize("argv", [["run", ADD, "-n", "-1"], ["run", ADD, "--budget", "-5"]])
def test_negative_counts_are_user_errors(argv, capsys):
    assert main(argv) == 1
    assert "non-negative" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.mk")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_parse_error_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.mk"
    bad.write_text("(def r (a)\n  (== a b))\n(query (q) (call r q))\n")
    assert main(["run", str(bad)]) == 1
    assert "2:9: unbound variable b" in capsys.readouterr().err


def test_no_query(tmp_path, capsys):
    f = tmp_path / "noq.mk"
    f.write_text("(def r (a) (== a (zero)))\n")
    assert main(["run", str(f)]) == 1
    assert "no (query" in capsys.readouterr().err


def test_specialize_writes_program_and_provenance(tmp_path, capsys):
    out = tmp_path / "bool.spec.mk"
    assert main(["specialize", BOOL, "-o", str(out)]) == 0
    src = parse(out.read_text())
    assert src.query is not None and "evalo" not in src.program
    info = json.loads((tmp_path / "bool.spec.mk.provenance.json").read_text())
    assert info["entry"] in src.program
    assert set(info["relations"]) <= set(src.program.arities())
    # The residual runs and finds answers.
    assert main(["run", str(out), "-n", "5"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 5


def test_specialize_failing_goal(tmp_path, capsys):
    assert main(["specialize", ADD, "--goal", "(call addo (zero) (zero) (succ (zero)))"]) == 0
    text = capsys.readouterr().out
    assert "(disj)" in text or "(fail)" in text
    parse(text)
    tmp = tmp_path / "f.mk"
    tmp.write_text(text)
    assert main(["run", str(tmp)]) == 0
    assert capsys.readouterr().out == ""


def test_graph_trivial_goal(capsys):
    assert main(["graph", ADD, "--goal", "(== x (zero))"]) == 0
    dot = capsys.readouterr().out
    assert dot.startswith("digraph")
    assert dot.count("[shape=") == 2 and "n0 -> n1;" in dot


def test_graph_bool_has_folds_to_entry(tmp_path):
    out = tmp_path / "g.dot"
    assert main(["graph", BOOL, "--dot", str(out)]) == 0
    dot = out.read_text()
    folds = [ln for ln in dot.splitlines() if 'label="fold"' in ln]
    assert len(folds) >= 2
    assert any(ln.split("->")[1].strip().startswith("n1 ") for ln in folds)


def test_graph_isolation_tree(capsys):
    assert main(["graph", NANDO, "--isolation", "(call ando x y (true))"]) == 0
    dot = capsys.readouterr().out
    assert dot.count('label="fail", shape=plaintext') == 3


def test_graph_isolation_needs_a_call(capsys):
    assert main(["graph", NANDO, "--isolation", "(== x (true))"]) == 1


def test_normalize_relation(capsys):
    assert main(["normalize", NANDO, "--relation", "nando"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all("⊤" in ln for ln in lines)


def test_normalize_goal(capsys):
    assert main(["normalize", NANDO, "--goal", "(call nando a b (true))"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 1


def test_normalize_unknown_relation(capsys):
    assert main(["normalize", NANDO, "--relation", "xoro"]) == 1


def test_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", str(CORPUS), "-n", "5", "--only", "add", "double_append", "--csv", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "program,variant,answers,found,wallclock_ms,unify_attempts,unify_successes,call_unfolds,overlap"
    assert [r.split(",")[:2] for r in rows[1:]] == [
        ["add", "original"], ["add", "conspd"], ["double_append", "original"], ["double_append", "conspd"]
    ]


def test_bench_bad_directory(tmp_path, capsys):
    assert main(["bench", str(tmp_path / "none")]) == 1


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_seed(capsys):
    main(["--seed", "7", "run", ADD])
    a = random.random()
    main(["--seed", "7", "run", ADD])
    assert random.random() == a
