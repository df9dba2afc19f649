import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ncsep.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_REPRODUCTION, main
from ncsep.experiment import SWEEP_COLUMNS

TOY = """
[nc]
theta = { kind = "inverse_sqrt", a = 1.0, b = 1.0 }

[oscillator]
m2 = 4.0

[state]
convention = "paper"

[sweep]
t_start = 0.0
t_end = 100.0
t_step = 1.0

[dynamics]
t_end = 2.0
n_points = 201
"""


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.toml"
    path.write_text(TOY)
    return str(path)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_toy_reports_reproduction_mismatch(capsys):
    assert main(["toy"]) == EXIT_REPRODUCTION
    out, err = capsys.readouterr()
    assert len(_rows(out)) == 801
    assert err.count("pipeline transition") == 2
    assert "closed-form transition" in err and "warning" in err


def test_toy_json(tmp_path):
    path = tmp_path / "toy.json"
    main(["toy", "--format", "json", "--out", str(path), "--t-end", "50"])
    doc = json.loads(path.read_text())
    assert len(doc["records"]) == 101
    assert doc["report"]["reproduced"] is False


def test_sweep_without_sign_disagreement(toy_file, capsys):
    assert main(["sweep", "--config", toy_file]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 101
    assert set(rows[0]) == set(SWEEP_COLUMNS)
    assert all(r["ps_closed_form"] for r in rows)


def test_sweep_flags_closed_form_disagreement(toy_file, capsys):
    code = main(["sweep", "--config", toy_file, "--t-start", "200", "--t-end", "230", "--t-step", "1"])
    assert code == EXIT_REPRODUCTION
    assert "disagree" in capsys.readouterr().err


def test_sweep_state_override(toy_file, capsys):
    assert main(["sweep", "--config", toy_file, "--state", "1,0", "--t-end", "0"]) == EXIT_OK
    assert len(_rows(capsys.readouterr().out)) == 1


@pytest.mark.parametrize("argv", [
    ["sweep", "--config", "/nonexistent/cfg.toml"],
    ["sweep", "--state", "x"],
])
def test_config_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_unknown_section_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("[mystery]\nx = 1\n")
    assert main(["check", "--config", str(path)]) == EXIT_CONFIG


def test_partial_sweep_is_numerical_error(tmp_path, capsys):
    path = tmp_path / "dip.json"
    path.write_text(json.dumps({
        "oscillator": {"m1": {"kind": "table", "t": [0, 1, 2], "v": [1, -1, 1]}},
        "sweep": {"t_start": 0, "t_end": 2, "t_step": 0.25},
    }))
    assert main(["sweep", "--config", str(path)]) == EXIT_NUMERICAL
    out, err = capsys.readouterr()
    assert len(_rows(out)) >= 1
    assert "pipeline failed" in err


def test_check(toy_file, capsys):
    assert main(["check", "--config", toy_file, "--t-end", "10", "--t-step", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_eigen(toy_file, capsys):
    assert main(["eigen", "--config", toy_file, "--t", "0"]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info["lambda1"] == pytest.approx(1 + math.sqrt(2))
    assert info["b"] == pytest.approx(6.0)
    assert max(info["residuals"].values()) < 1e-10


def test_phases(toy_file, tmp_path, capsys):
    out = tmp_path / "traj.csv"
    assert main(["phases", "--config", toy_file, "--out", str(out)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().err)
    assert summary["constraint_residual"] < 1e-8
    assert summary["phi_geometric"] == 0.0  # no drive and no initial displacement
    assert len(out.read_text().splitlines()) == 202


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ncsep", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sweep" in proc.stdout
