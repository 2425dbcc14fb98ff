import json
import subprocess
import sys
from pathlib import Path

import pytest

from howekit.cli import main, run

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def corpus(name):
    return str(CORPUS / name)


def test_eval_example():
    report, code = run(["eval", corpus("cbn.sig"), "app(lam(x. x), lam(y. y))", "--label", "eval", "--fuel", "3"])
    assert code == 0
    assert report["targets"] == ["var 1"] and report["complete"]


def test_eval_out_of_fuel_is_inconclusive():
    report, code = run(["eval", "cbn", "Omega", "--fuel", "6"])
    assert code == 2 and report["targets"] == [] and report["fuel_exhausted"]


def test_eval_trace():
    report, _ = run(["eval", "cbn", "app(I, I)", "--fuel", "3", "--trace"])
    [d] = report["derivations"]
    assert d["rule"] == "app_eval"


def test_eval_howe_format():
    report, code = run(["eval", corpus("cbn-howe.sig"), "app(I, I)", "--fuel", "4"])
    assert code == 0 and report["label"] == "==>" and len(report["targets"]) == 1


def test_bisim_example():
    report, code = run(["bisim", corpus("cbv.sig"), "lam(x. I)", "lam(x. app(lam(y. I), x))", "--depth", "4", "--values-only"])
    assert code == 0 and report["status"] == "holds"


def test_bisim_program_pool():
    argv = ["bisim", "cbv", "lam(x. I)", "lam(x. app(lam(y. I), x))", "--depth", "4", "--extra", "Omega"]
    report, code = run(argv)
    assert report["status"] != "holds" and code in (1, 2)
    assert report["replayed"]


def test_validate_naive_rule():
    report, code = run(["validate", corpus("cbn-howe-naive.sig")])
    assert code == 1
    [d] = report["diagnostics"]
    assert "non-metavariable target pattern" in d["message"]


@pytest.mark.parametrize("name", ["cbn.sig", "cbv.sig", "nondet.sig", "cbn-howe.sig", "cbn-howe-rigid.sig"])
def test_validate_corpus(name):
    assert run(["validate", corpus(name)])[1] == 0


def test_rigidify_writes_files(tmp_path):
    out = tmp_path / "rigid.sig"
    report, code = run(["rigidify", corpus("cbn-howe.sig"), "-o", str(out)])
    assert code == 0 and report["valid"]
    assert out.read_text() == (CORPUS / "cbn-howe-rigid.sig").read_text()
    mapping = json.loads(out.with_suffix(".json").read_text())
    assert mapping
    assert run(["validate", str(out)])[1] == 0


def test_rigidify_without_howe_rules(tmp_path):
    assert run(["rigidify", "cbn", "-o", str(tmp_path / "x.sig")])[1] == 3


def test_parse_error_is_located(capsys):
    assert main(["eval", "cbn", "app(lam(x. x)"]) == 3
    assert "1:14:" in capsys.readouterr().err


def test_bad_arguments():
    assert run(["bisim", "cbn"])[1] == 3
    assert run(["frobnicate"])[1] == 3
    assert run(["eval", "no-such-file.sig", "I"])[1] == 3


def test_check_rel(tmp_path):
    good = tmp_path / "good.rel"
    good.write_text("# identical pairs\nI ~ lam(y. y)\n\nOmega ~ Omega\n")
    report, code = run(["check-rel", "cbn", str(good), "--fuel", "6", "--pool-size", "2"])
    assert report["pairs_checked"] == 2 and code in (0, 2)
    bad = tmp_path / "bad.rel"
    bad.write_text("I ~ lam(x. app(I, x))\n")
    assert run(["check-rel", "cbn", str(bad)])[1] == 1
    broken = tmp_path / "broken.rel"
    broken.write_text("I ~ I\nI I\n")
    report, code = run(["check-rel", "cbn", str(broken)])
    assert code == 3 and report["line"] == 2


def test_enumerate():
    report, code = run(["enumerate", "cbn", "--size", "3"])
    assert code == 0 and report["count"] == 3
    report, _ = run(["enumerate", "cbv", "--sort", "v", "--ctx", "1 v", "--size", "3"])
    assert report["terms"] == ["var 1", "lam(x. x)", "lam(x. var 1@v)"]


def test_howe_basic():
    report, code = run(["howe", "cbn", "--size", "3", "--ctx-bound", "1", "--checks", "basic"])
    assert code == 0
    assert all(c["ok"] for c in report["checks"])


def test_congruence_small():
    argv = ["congruence", "cbn", "--samples", "10", "--depth", "2", "--term-size", "4", "--context-size", "4"]
    report, code = run(argv)
    assert report["samples"] == 10 and report["counterexamples"] == []
    assert code in (0, 2)


def test_reports_replay(tmp_path):
    rel = tmp_path / "r.rel"
    rel.write_text("I ~ lam(x. app(I, x))\n")
    for argv in (
        ["bisim", "nondet", "amb(I)", "I", "--depth", "2", "--fuel", "6"],
        ["check-rel", "cbn", str(rel)],
        ["congruence", "cbv", "--samples", "5", "--seed", "7", "--depth", "2", "--term-size", "4"],
    ):
        first, code = run(argv)
        again, code2 = run(first["command"])
        assert code == code2
        for key in ("status", "violations", "holds", "counterexamples"):
            assert first.get(key) == again.get(key)


def test_json_report_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    assert main(["--json", "--report", str(path), "enumerate", "cbn", "--size", "2"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads(path.read_text())
    assert printed["exit"] == 0


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "howekit", "enumerate", "cbn", "--size", "2"], capture_output=True, text=True
    )
    assert out.returncode == 0 and "lam(x. x)" in out.stdout
