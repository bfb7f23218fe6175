import json
import math

import numpy as np
import pytest

import bzfronts as bz
from bzfronts.cli import emit_csv, emit_svg, main
from bzfronts.errors import DomainError


def run_cli(*args):
    return main(list(args))


def test_kappa_command(capsys):
    assert run_cli("kappa", "--kernel", "weak:tau=1", "--r", "0.75", "--c", "1", "--j", "1") == 0
    assert capsys.readouterr().out.strip() == "0.8"


def test_kappa_quadrature_route(capsys):
    assert run_cli("kappa", "--kernel", "weak:tau=1", "--r", "0.75", "--c", "1",
                   "--quadrature") == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.8, abs=1e-6)


def test_classify_command(capsys):
    assert run_cli("classify", "--r", "0.75", "--b", "0.3", "--kernel", "weak:tau=1") == 0
    row = capsys.readouterr().out.strip().split(",")
    assert row[-1] == "PulledCertified"
    assert float(row[4]) == pytest.approx(0.93)


def test_unknown_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("kappa", "--bogus")
    assert exc.value.code == 1


def test_domain_error_exits_1(capsys):
    assert run_cli("kappa", "--kernel", "nope", "--r", "0.5", "--c", "2") == 1


def test_missing_option_exits_1(capsys):
    assert run_cli("kappa", "--kernel", "point") == 1
    assert "missing required option" in capsys.readouterr().err


def test_profile_verify_round_trip(tmp_path, capsys):
    out = tmp_path / "prof.csv"
    code = run_cli("profile", "--r", "0.5", "--b", "0.2", "--c", "1.5",
                   "--kernel", "point", "--grid", "-70,50,0.01",
                   "--out", str(out))
    assert code == 0
    sidecar = json.loads((tmp_path / "prof.json").read_text())
    assert sidecar["converged"] is True
    assert sidecar["residual"] < 1e-6
    code = run_cli("verify", "--profile", str(out), "--r", "0.5", "--b", "0.2",
                   "--c", "1.5", "--kernel", "point")
    assert code == 0
    assert "overall: PASS" in capsys.readouterr().out


def test_scalar_bench_command(capsys):
    code = run_cli("scalar-bench", "--r", "0", "--l", "0",
                   "--x-min", "-110", "--x-max", "30", "--t-end", "40")
    assert code == 0
    out = capsys.readouterr().out
    assert "c_star = 2" in out


def test_sweep_deterministic_across_jobs(tmp_path, capsys):
    args = ["sweep", "--r", "0.75", "--b", "0.3,4", "--tau", "1",
            "--x-min", "-30", "--x-max", "10", "--t-end", "12", "--stride", "10"]
    out1 = tmp_path / "s1.csv"
    out2 = tmp_path / "s2.csv"
    assert run_cli(*args, "--out", str(out1), "--jobs", "1") == 0
    assert run_cli(*args, "--out", str(out2), "--jobs", "2") == 0
    assert out1.read_bytes() == out2.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header == "r,b,tau,c_est,settled_digits,verdict"


def test_sweep_svg_output(tmp_path):
    out = tmp_path / "s.csv"
    svg = tmp_path / "s.svg"
    assert run_cli("sweep", "--r", "0.75", "--b", "0.3,4", "--tau", "1",
                   "--x-min", "-30", "--x-max", "10", "--t-end", "12",
                   "--stride", "10", "--out", str(out), "--svg", str(svg)) == 0
    text = svg.read_text()
    assert text.startswith("<svg") and "polyline" in text


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("r=0.5\nb=1.0\nkernel=point\n")
    # config supplies everything
    assert run_cli("--config", str(cfg), "classify") == 0
    row = capsys.readouterr().out.strip().split(",")
    assert float(row[0]) == 0.5
    # explicit flag wins over the config value
    assert run_cli("--config", str(cfg), "classify", "--r", "0.75") == 0
    row = capsys.readouterr().out.strip().split(",")
    assert float(row[0]) == 0.75


def test_emit_csv_formats(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv([(0.123456789, float("nan"), 3)], ["a", "b", "c"], str(path))
    text = path.read_text()
    assert text == "a,b,c\n0.123457,nan,3\n"
    emit_csv([], ["x", "y"], str(path))
    assert path.read_text() == "x,y\n"


def test_emit_svg_refuses_empty(tmp_path):
    with pytest.raises(DomainError):
        emit_svg([("empty", [], [])], str(tmp_path / "x.svg"))


def test_simulate_command_outputs(tmp_path, capsys):
    prefix = tmp_path / "run"
    code = run_cli("simulate", "--r", "0.75", "--b", "0.3", "--tau", "1",
                   "--x-min", "-30", "--x-max", "10", "--t-end", "12",
                   "--stride", "10", "--file-stride", "30",
                   "--out-prefix", str(prefix))
    assert code == 0
    front = (tmp_path / "run_front.csv").read_text().splitlines()
    assert front[0] == "t,x_front,speed_inst"
    snaps = (tmp_path / "run_snapshots.csv").read_text().splitlines()
    assert snaps[0] == "t,x,u,v,w"
    assert len(snaps) > 10


def test_cli_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        run_cli("classify", "--r", "0.6", "--b", "2", "--kernel", "strong:tau=2",
                "--out", str(out))
    assert a.read_bytes() == b.read_bytes()
