import json
import subprocess
import sys

import numpy as np
import pytest

from hartreekit.cli import main
from hartreekit.config import PotentialSpec, load_config
from hartreekit.errors import ParameterError


def run_cli(*args):
    return main(list(args))


def test_default_config_roundtrip():
    cfg = load_config(None)
    assert cfg.mu1 == 1.0 and cfg.mu2 == 2.0 and cfg.beta == 3.0
    assert cfg.convention == "A3"


def test_config_file_parsing(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(
        "[problem]\n"
        "mu1 = 1.5\nmu2 = 2.5\nbeta = 4.0\nlambda1 = 0.05\nlambda2 = 0.0\n"
        "v1.family = inverse_square\nv1.v0 = 0.2\nv1.s = 2.0\n"
        "v2.family = none\n"
        "[grid]\nm = 200\nr_max = 30.0\nstretch = 1.01\n"
        "[flow]\nmax_iterations = 1000\nresidual_tolerance = 5e-4\n"
        "[report]\nseed = 99\nconvention = C3\n"
    )
    cfg = load_config(p)
    assert cfg.mu1 == 1.5 and cfg.beta == 4.0
    assert cfg.lam1 == 0.05 and cfg.lam2 == 0.0
    assert cfg.grid_m == 200 and cfg.r_max == 30.0
    assert cfg.flow.max_iterations == 1000
    assert cfg.seed == 99 and cfg.convention == "C3"
    grid = cfg.build_grid()
    prob = cfg.build_problem(grid)
    assert prob.V1 is not None and prob.V2 is None


def test_config_missing_file():
    with pytest.raises(FileNotFoundError):
        load_config("/nonexistent/path.cfg")


def test_config_bad_convention(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("[report]\nconvention = X9\n")
    with pytest.raises(ParameterError):
        load_config(p)


def test_potential_csv_roundtrip(tmp_path, grid):
    r = np.linspace(0.01, 40.0, 200)
    vals = 0.1 * (1 + r**2) ** -2.0
    csv = tmp_path / "v.csv"
    csv.write_text("r,value\n" + "\n".join(f"{a},{b}" for a, b in zip(r, vals)))
    spec = PotentialSpec(family="csv", path=str(csv), tail_exponent=4.0, tail_coeff=0.1)
    V = spec.build(grid)
    assert abs(V(1.0) - 0.1 / 4.0) <= 1e-3
    assert V.p_tail == 4.0


def test_potential_csv_missing_file(grid):
    spec = PotentialSpec(family="csv", path="/no/such/file.csv")
    with pytest.raises(FileNotFoundError):
        spec.build(grid)


def test_cli_constants(tmp_path):
    code = run_cli("constants", "--out", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "constants.json").read_text())
    assert abs(data["s_hl_squared"] - 225.0 / 16.0) < 1e-10


def test_cli_verify_check(tmp_path):
    code = run_cli("verify", "2.2", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["all_passed"]


def test_cli_usage_error_exit_code(tmp_path):
    assert run_cli("verify", "bogus", "--out", str(tmp_path)) == 2


def test_cli_domain_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[problem]\nbeta = 0.5\n")
    code = run_cli("run-all", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert code == 2


def test_cli_missing_potential_file_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    missing = tmp_path / "nope.csv"
    cfg.write_text(f"[problem]\nv1.family = csv\nv1.path = {missing}\n")
    code = run_cli("run-all", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert code == 2
    err = capsys.readouterr().err
    assert str(missing) in err


def test_cli_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "hartreekit", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "run-all" in proc.stdout


def test_cli_grid_overrides(tmp_path):
    code = run_cli("constants", "--out", str(tmp_path),
                   "--grid-m", "200", "--r-max", "30.0")
    assert code == 0


def test_cli_solve_ground_writes_profiles(tmp_path):
    code = run_cli("solve-ground", "--out", str(tmp_path))
    assert code == 0
    data = np.loadtxt(tmp_path / "ground_state.csv", delimiter=",", skiprows=1)
    assert data.shape[1] == 3
    assert (tmp_path / "flow_trace.csv").exists()
