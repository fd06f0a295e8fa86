import csv
import io
import json
import subprocess
import sys

import pytest

from turnpike.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_static(capsys):
    code, out, _ = run_cli(capsys, "static", "--problem", "ex1", "--assumptions")
    data = json.loads(out)
    assert code == 0
    assert data["x_bar"] == pytest.approx([1.0, 0.0], abs=1e-10)
    assert data["assumptions"]["kalman_ok"]


def test_riccati(capsys):
    code, out, _ = run_cli(capsys, "riccati", "--problem", "ex2")
    assert code == 0 and json.loads(out)["C2"] > 0


def test_solve_then_verify(capsys, tmp_path):
    traj, summ = tmp_path / "t.csv", tmp_path / "s.json"
    code, _, _ = run_cli(capsys, "solve", "--problem", "ex1", "--method", "direct", "--T", "10",
                         "--steps", "500", "-o", str(traj), "--summary", str(summ))
    assert code == 0
    assert json.loads(summ.read_text())["kkt_residual"] <= 1e-8
    code, out, _ = run_cli(capsys, "verify-turnpike", "--input", str(traj), "--problem", "ex1")
    assert code == 0 and json.loads(out)["envelope_ok"]


def test_error_goes_to_stderr_as_json(capsys):
    code, out, err = run_cli(capsys, "solve", "--problem", "ex1", "--T", "-1")
    assert code == 1 and out == ""
    assert json.loads(err)["message"] == "T must be positive"


def test_unknown_problem(capsys):
    code, _, err = run_cli(capsys, "static", "--problem", "nope")
    assert code == 1 and json.loads(err)["error"] == "ProblemSpecError"


def test_compare_csv(capsys):
    code, out, _ = run_cli(capsys, "compare", "--problem", "ex1", "--T", "6", "--steps", "600",
                           "--run", "shoot-mid", "--run", "shoot-classic")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["distance"]) <= 1e-8


def test_sweep_csv(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--problem", "ex1", "--T", "5,7", "--workers", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["T"] for r in rows] == ["5", "7"]


def test_run_report(capsys, tmp_path):
    rep = tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "run", "--problem", "ex1-periodic", "--T", "5", "--steps", "100",
                         "--report", str(rep))
    data = json.loads(rep.read_text())
    assert code == 0 and data["solver"]["iterations"] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "turnpike", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "turnpike" in proc.stdout
