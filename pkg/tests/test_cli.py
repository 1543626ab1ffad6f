import json

import numpy as np
import pytest

from geopump.cli import fmt, json_number, main, write_atomic


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_number_formatting():
    assert fmt(-0.0) == "0"
    assert fmt(1.0) == "1"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(-1.23456789012345e-20) == "-1.23456789012e-20"
    assert json_number(float("nan")) is None
    assert json_number(-0.0) == 0.0 and str(json_number(-0.0)) == "0.0"


def test_write_atomic_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "x.txt"
    write_atomic(target, "a\n")
    assert target.read_text() == "a\n"
    assert [p.name for p in target.parent.iterdir()] == ["x.txt"]


def test_euler_commands(capsys):
    assert main(["euler", "--m", "0.5", "--grid", "128"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["chi"] - 2.0) < 1e-6 and doc["grid"] == [128, 128]
    assert doc["residual_to_even_integer"] < 1e-6
    assert main(["euler", "--m", "3", "--grid", "128"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["chi"]) < 1e-6
    assert main(["euler", "--m", "0.5", "--axes", "12"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["chi"] + 2.0) < 1e-6


def test_euler_gap_error(capsys):
    assert main(["euler", "--m", "2", "--grid", "64"]) == 3
    err = capsys.readouterr().err
    assert "gap closed" in err and "phi=(0.000000, 0.000000)" in err


def test_euler_unconverged_grid_is_verification_failure(capsys):
    # a coarse grid near the transition cannot resolve the class
    assert main(["euler", "--m", "1.9", "--grid", "4"]) == 4


def test_simulate_trace(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"t_end": 20.0, "out": str(tmp_path / "o")})
    assert main(["simulate", "--config", cfg]) == 0
    lines = (tmp_path / "o" / "trace.csv").read_text().splitlines()
    assert lines[0] == "t,E1,E2,Ep1,Ep2,trans_err,norm_err"
    assert len(lines) == 1 + 201
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    assert data[-1, 0] == 20.0
    np.testing.assert_allclose(data[:, 1], -data[:, 2], atol=1e-6)


def test_simulate_zero_duration(tmp_path):
    cfg = _write(tmp_path / "c.json", {"t_end": 0.0, "out": str(tmp_path)})
    assert main(["simulate", "--config", cfg]) == 0
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert len(lines) == 2
    row = [float(x) for x in lines[1].split(",")]
    assert row[:5] == [0.0] * 5
    # leakage and norm columns carry only rounding of the prepared state
    assert max(abs(x) for x in row[5:]) < 1e-15


def test_simulate_failure_leaves_no_file(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"m": 2.0, "phi0": [0.0, 0.0], "t_end": 1.0, "out": str(tmp_path / "o")})
    assert main(["simulate", "--config", cfg]) == 3
    assert not (tmp_path / "o").exists() or not any((tmp_path / "o").iterdir())


def test_ensemble_smoke(tmp_path):
    cfg = _write(tmp_path / "c.json", {"n_traj": 2, "t_end": 10.0, "out": str(tmp_path)})
    assert main(["ensemble", "--config", cfg]) == 0
    header = (tmp_path / "ensemble.csv").read_text().splitlines()[0]
    assert header == "t,E2_mean,E2_sigma,E2_analytic"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert {"fitted_slope", "analytic_slope", "rel_err"} <= set(summary)


def test_scan_fib_small(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"n_traj": 4, "scan_t_end": 20.0, "out": str(tmp_path)})
    assert main(["scan-fib", "--config", cfg, "--fib-depth", "2"]) == 0
    out = capsys.readouterr().out
    assert "2/1" in out and "3/2" in out
    rows = (tmp_path / "scan.csv").read_text().splitlines()
    assert rows[0] == "p,q,ratio,sigma_slope" and len(rows) == 3


@pytest.mark.parametrize(
    "argv,code",
    [
        (["simulate", "--config", "/nonexistent/c.json"], 2),
        (["ensemble", "--threads", "0"], 2),
        (["euler", "--grid", "1"], 2),
        (["bogus"], 2),
    ],
)
def test_error_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_config_error_names_field(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"stride": 0})
    assert main(["simulate", "--config", cfg]) == 2
    assert "'stride'" in capsys.readouterr().err


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("GEOPUMP_THREADS", "-3")
    assert main(["euler"]) == 2
    assert "GEOPUMP_THREADS" in capsys.readouterr().err


def test_verify_list_and_fault(capsys):
    assert main(["verify", "--list"]) == 0
    names = capsys.readouterr().out.split()
    assert "projector_identity" in names and len(names) == 6
    assert main(["verify", "--inject-fault", "--check", "projector_identity"]) == 4
    assert "FAIL projector_identity" in capsys.readouterr().out
    assert main(["verify", "--check", "nope"]) == 2
