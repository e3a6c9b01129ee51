import json
import subprocess
import sys

import pytest

from geocontact.cli import main
from geocontact.scenario import OUTPUT_ENV

from .test_scenario import BASE

# fingertip contact starts next to its chart pole and heads straight into it
POLE = BASE.replace("body1 = [1.5707963267948966, 0.0]", "body1 = [0.05, 0.0]").replace(
    "heading = 1.5707963267948966", "heading = 3.141592653589793")


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(BASE)
    return p


def test_run_writes_outputs(tiny, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(tiny), "--out", str(out), "--seed", "7"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["scenario"] == "tiny" and summary["seed"] == 7
    assert (out / "tiny_contact0.csv").is_file()
    assert json.loads((out / "tiny_summary.json").read_text()) == summary


def test_run_step_override(tiny, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(tiny), "--out", str(out), "--step", "5e-3"]) == 0
    assert len((out / "tiny_contact0.csv").read_text().splitlines()) == 1 + 11


def test_run_rejects_bad_step(tiny, capsys):
    assert main(["run", str(tiny), "--step", "-1"]) == 1
    assert "--step" in capsys.readouterr().err


def test_env_var_output(tiny, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["run", str(tiny)]) == 0
    assert (tmp_path / "env" / "tiny" / "tiny_summary.json").is_file()


def test_invalid_scenario_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text(BASE.replace("eta = 50.0", "eta = -1.0"))
    assert main(["run", str(p)]) == 1
    assert "eta: must be positive" in capsys.readouterr().err


def test_numerical_failure_exit_2(tmp_path, capsys):
    p = tmp_path / "pole.toml"
    p.write_text(POLE)
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "numerical failure" in err and "t = " in err


def test_validate(tiny, tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("mode = ")
    assert main(["validate", str(tiny), "sphere_eta100"]) == 0
    assert main(["validate", str(tiny), str(bad)]) == 1
    out = capsys.readouterr()
    assert "ok (tiny, kinematic mode, 1 contact(s))" in out.out
    assert "invalid" in out.err


def test_list_builtin(capsys):
    assert main(["list-builtin"]) == 0
    names = capsys.readouterr().out.split()
    assert "sphere_eta100" in names and len(names) == 10


def test_module_entry_point(tiny, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "geocontact", "run", str(tiny), "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["mode"] == "kinematic"


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
