import json
import subprocess
import sys

import pytest

from ellqg.cli import main, read_config
from ellqg.errors import CapError
from ellqg.harness import REGISTRY, SUITES, SuiteConfig, emit_report, run_suite, stable_seed


def test_every_suite_has_checks():
    assert {c.suite for c in REGISTRY} == set(SUITES)
    names = [c.name for c in REGISTRY]
    assert len(names) == len(set(names))


def test_config_caps():
    with pytest.raises(CapError):
        SuiteConfig(n=9)
    with pytest.raises(CapError):
        SuiteConfig(k_max=5)
    with pytest.raises(ValueError):
        SuiteConfig(suite="nope")
    with pytest.raises(ValueError):
        SuiteConfig(tol=0)


def test_stable_seed():
    assert stable_seed(0, "theta.odd") == stable_seed(0, "theta.odd")
    assert stable_seed(0, "theta.odd") != stable_seed(1, "theta.odd")


def test_json_is_byte_identical(tmp_path):
    cfg = SuiteConfig(suite="ybe", n=2, trials=2, seed=5)
    a = emit_report(run_suite(cfg), "json")
    b = emit_report(run_suite(SuiteConfig(suite="ybe", n=2, trials=2, seed=5, jobs=3)), "json")
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == "ellqg-report/1"
    assert "wall_time" not in doc
    assert [r["name"] for r in doc["records"]] == sorted(
        (r["name"] for r in doc["records"]), key=[c.name for c in REGISTRY].index)
    assert all(r["params"] for r in doc["records"])
    assert "wall_time" in json.loads(emit_report(run_suite(cfg), "json", timing=True))


def test_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["--suite", "theta", "--trials", "2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    assert main(["--suite", "theta", "--trials", "2", "--tol", "1e-30"]) == 1
    assert main(["--n", "9"]) == 2
    assert main(["--suite", "bogus"]) == 2
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2
    capsys.readouterr()


def test_text_format(capsys):
    assert main(["--suite", "theta", "--trials", "1", "--format", "text"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.startswith("PASS") for line in lines)
    assert lines[-1].startswith("PASS theta: 4/4")


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nsuite = theta\ntrials=1\nk-max = 2\nformat=json\n")
    assert read_config(str(cfg)) == {"suite": "theta", "trials": 1, "k_max": 2, "format": "json"}
    assert main(["--config", str(cfg), "--suite", "ybe", "--n", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["suite"] == "ybe" and doc["config"]["trials"] == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=blue\n")
    assert main(["--config", str(bad)]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ellqg", "--suite", "theta", "--trials", "1",
                          "--format", "text"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "PASS theta" in out.stdout


def test_check_error_becomes_failed_record():
    from ellqg.harness import Check, _run_check
    from ellqg.errors import PoleProximityError

    def boom(ctx):
        raise PoleProximityError("near a pole")

    rec = _run_check(Check("theta", "x.boom", "always fails", 1.0, boom), SuiteConfig())
    assert not rec.passed and rec.deviation is None and "near a pole" in rec.error
