from __future__ import annotations

import json
import math
import subprocess
import sys

import pytest

from bubbletower.cli import main

H4_SPEC = '{"p": 3, "variant": "H4", "tau0": 1}'


def test_recurrence_csv(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "recurrence", "--p", "3", "--k", "5"]) == 0
    rows = (tmp_path / "recurrence_p3.csv").read_text().splitlines()
    assert float(rows[2].split(",")[1]) == pytest.approx(0.3660254, abs=1e-7)
    assert "delta_1=0.3660254038" in capsys.readouterr().out


def test_profile_dump_to_stdout(capsys):
    assert main(["profile", "--kind", "z0", "--dump", "-"]) == 0
    out = capsys.readouterr().out.splitlines()
    row = next(line for line in out if line.startswith("0,"))
    assert float(row.split(",")[1]) == pytest.approx(math.log(64.0 / 81.0), abs=1e-15)


def test_profile_singular_needs_a(tmp_path):
    assert main(["--out", str(tmp_path), "profile", "--kind", "singular"]) == 2
    assert main(["--out", str(tmp_path), "profile", "--kind", "singular", "--a", "1.2"]) == 0
    assert (tmp_path / "profile_singular.csv").exists()


def test_gelfand_diagram(tmp_path):
    argv = ["--out", str(tmp_path), "diagram", "--spec", '{"p": 1}', "--mu-min", "0.2", "--mu-max", "5", "--points", "25"]
    assert main(argv) == 0
    rows = (tmp_path / "diagram_p1_UnitH.csv").read_text().splitlines()[1:]
    assert max(float(r.split(",")[1]) for r in rows) == pytest.approx(2.0, abs=2e-3)


def test_shoot_and_analyze(tmp_path):
    assert main(["--out", str(tmp_path), "shoot", "--spec", H4_SPEC, "--mu", "5"]) == 0
    summary = json.loads((tmp_path / "solution_p3_H4_mu5.summary.json").read_text())
    assert summary["lambda"] > 0 and summary["pohozaev"] is not None
    assert main(["--out", str(tmp_path), "analyze", "--spec", H4_SPEC, "--mu", "6", "--curves", "U:1.5,V:0"]) == 0
    rep = json.loads((tmp_path / "analysis_p3_H4_mu6.json").read_text())
    assert rep["intersections"][0]["count"] >= 3


def test_singular_and_json_format(tmp_path):
    assert main(["--out", str(tmp_path), "--format", "json", "singular", "--spec", H4_SPEC]) == 0
    data = json.loads((tmp_path / "singular_p3_H4.summary.json").read_text())
    assert data["lambda_star"] == pytest.approx(1.584238646669, rel=1e-9)
    rows = json.loads((tmp_path / "singular_p3_H4.json").read_text())
    assert rows[0]["U"] > rows[-1]["U"]


def test_hat_recurrence_json(tmp_path):
    assert main(["--out", str(tmp_path), "--format", "json", "hat-recurrence", "--k", "3"]) == 0
    rows = json.loads((tmp_path / "hat_recurrence.json").read_text())
    assert rows[1]["c_hat"] == pytest.approx(0.203188, abs=1e-6)


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k": 3, "p": 4, "out": str(tmp_path / "a")}))
    assert main(["--config", str(cfg), "recurrence"]) == 0
    assert len((tmp_path / "a" / "recurrence_p4.csv").read_text().splitlines()) == 5
    # flags beat the file
    assert main(["--config", str(cfg), "recurrence", "--k", "6"]) == 0
    assert len((tmp_path / "a" / "recurrence_p4.csv").read_text().splitlines()) == 8


def test_config_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"foo": 1}')
    assert main(["--config", str(cfg), "recurrence", "--p", "3"]) == 2
    cfg.write_text('{"solver": {"bogus": 1}}')
    assert main(["--config", str(cfg), "--out", str(tmp_path), "shoot", "--spec", H4_SPEC, "--mu", "2"]) == 2


def test_argument_errors(tmp_path):
    assert main(["recurrence", "--p", "abc"]) == 2
    assert main(["--out", str(tmp_path), "shoot", "--spec", "{not json", "--mu", "2"]) == 2
    assert main(["--out", str(tmp_path), "shoot", "--spec", '{"p": 3, "variant": "H4", "x": 1}', "--mu", "2"]) == 2
    assert main(["--out", str(tmp_path), "diagram", "--spec", '{"p": 1}', "--mu-min", "3", "--mu-max", "1"]) == 2


def test_numerical_failure_json(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "recurrence", "--p", "1.5"]) == 1
    err = json.loads(capsys.readouterr().out)
    assert err["error"] == "domain" and err["detail"]


def test_spec_from_file(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text('{"p": 1}')
    assert main(["--out", str(tmp_path), "shoot", "--spec", str(spec), "--mu", "1"]) == 0


def test_outputs_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["--out", str(tmp_path / d), "diagram", "--spec", H4_SPEC, "--mu-min", "3", "--mu-max", "4", "--points", "3"]) == 0
    a = (tmp_path / "a" / "diagram_p3_H4.csv").read_bytes()
    assert a == (tmp_path / "b" / "diagram_p3_H4.csv").read_bytes()


def test_module_help_lists_defaults():
    out = subprocess.run([sys.executable, "-m", "bubbletower", "diagram", "--help"], capture_output=True, text=True, check=True).stdout
    assert "default: 17" in out and "default: 1e-10" in out
