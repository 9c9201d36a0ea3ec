import subprocess
import sys

import numpy as np
import pytest

from eqobs.checks import ALL_SYSTEMS, run_checks
from eqobs.cli import main
from eqobs.errors import UsageError

SCENARIO = """\
system = "s2_direction"
t_end = 2.0
dt = 0.01
seed = 5
[truth]
state = [0.0, 1.0, 0.0]
[observer]
initial = [0.0, 0.0, 1.0]
gain = 1.5
[perturbation]
output_std = 0.01
"""


def test_run_checks_all_pass_small():
    report = run_checks("all", n=10, seed=1)
    assert report.passed
    assert {r.system for r in report.results} == set(ALL_SYSTEMS)


def test_truncated_variant_fails_with_witness():
    report = run_checks("s2_truncated", n=10)
    assert not report.passed
    (res,) = report.results
    assert res.name == "input_closure" and res.witness is not None


def test_run_checks_usage_errors():
    with pytest.raises(UsageError):
        run_checks("all", n=0)
    with pytest.raises(UsageError):
        run_checks("torus", n=5)
    with pytest.raises(UsageError):
        run_checks("all", n=5, tol=-1.0)


def test_parallel_equals_serial():
    a = run_checks("s2_direction", n=20, seed=9, workers=1).residuals()
    b = run_checks("s2_direction", n=20, seed=9, workers=4).residuals()
    assert a == b


def test_tol_override_can_fail():
    report = run_checks("so3_attitude", n=5, tol=1e-30)
    assert not report.passed
    completeness = [r for r in report.results if r.name == "completeness_sigma_min"][0]
    assert completeness.passed and completeness.lower_bound


def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for sid in ("s2_direction", "so3_attitude", "se3_pose"):
        assert sid in out


def test_cli_check_exit_codes(capsys):
    assert main(["check", "--system", "s2_direction", "--samples", "5"]) == 0
    assert main(["check", "--system", "s2_truncated", "--samples", "5"]) == 1
    assert "witness" in capsys.readouterr().out
    assert main(["check", "--samples", "0"]) == 2
    assert main(["check", "--system", "torus"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["check", "--samples", "many"])
    assert exc.value.code == 2


def test_cli_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("EQOBS_SEED", "x")
    assert main(["check", "--system", "s2_direction", "--samples", "2"]) == 2
    monkeypatch.setenv("EQOBS_SEED", "3")
    assert main(["check", "--system", "s2_direction", "--samples", "2"]) == 0


def test_cli_simulate(tmp_path, capsys):
    sc = tmp_path / "s.toml"
    sc.write_text(SCENARIO)
    out = tmp_path / "o.csv"
    assert main(["simulate", "--scenario", str(sc), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 202
    sc.write_text(SCENARIO + "bogus = 1\n")
    assert main(["simulate", "--scenario", str(sc), "--out", str(out)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_console_script_determinism(tmp_path):
    sc = tmp_path / "s.toml"
    sc.write_text(SCENARIO)
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        subprocess.run([sys.executable, "-m", "eqobs.cli", "simulate", "--scenario", str(sc),
                        "--out", str(out)], check=True, capture_output=True)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
