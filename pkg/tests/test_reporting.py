import json

import numpy as np
import pytest

from hartreekit import (
    AccuracyWarning,
    FlowConfig,
    ground_pair,
    energy_I,
    from_callable,
    make_grid,
    solve_limit_ground_state,
)
from hartreekit.grids import dirichlet_seminorm
from hartreekit.reporting import LemmaReport, Table, write_bundle


def test_energy_breakdown_serializes(grid, cc, free_problem):
    br = energy_I(ground_pair(1.0, 0.0, cc, grid), free_problem)
    d = br.to_dict()
    blob = json.dumps(d, sort_keys=True)
    back = json.loads(blob)
    for key in ("kinetic", "potential", "nonlocal_11", "nonlocal_22",
                "nonlocal_12", "total", "nehari_defect"):
        assert key in back


def test_trial_profile_csv_export(trial_profile, tmp_path):
    path = tmp_path / "profile.csv"
    trial_profile.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[0] == trial_profile.grid.M
    assert np.allclose(data[:, 1], trial_profile.profile.values)


def test_flow_trace_csv(cc, grid, tmp_path):
    diag = solve_limit_ground_state(cc, FlowConfig(max_iterations=60), grid)
    path = tmp_path / "trace.csv"
    diag.trace_csv(path)
    text = path.read_text().splitlines()
    assert text[0] == "iteration,energy,nehari_defect,weak_residual"
    assert len(text) >= 2


def test_dirichlet_resolution_warning():
    coarse = make_grid(5, 16, 40.0, 1.0)
    f = from_callable(coarse, lambda r: np.exp(-((r / 0.4) ** 2)))
    with pytest.warns(AccuracyWarning):
        dirichlet_seminorm(f, check_resolution=True)


def test_report_rows_require_tolerance():
    rep = LemmaReport("x", "demo")
    ok = rep.require("missing tolerance row", 0.0, target=0.0, tol=None)
    assert not ok and rep.status == "fail"


def test_write_bundle_layout(tmp_path):
    rep = LemmaReport("demo", "demo check")
    rep.require("unit row", 1.0, target=1.0, tol=0.0)
    t = Table("numbers", ["x", "y"])
    t.add(x=1.0, y=np.float64(2.0))
    rep.tables.append(t)
    payload = write_bundle(tmp_path, [rep], extras={"flag": np.bool_(True)},
                           runtimes={"demo": 0.1})
    assert payload["all_passed"]
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "report.md").exists()
    assert (tmp_path / "demo_numbers.csv").read_text().splitlines()[1] == "1.0,2.0"
    blob = json.loads((tmp_path / "report.json").read_text())
    assert blob["extras"]["flag"] is True
    assert "runtime" not in json.dumps(blob)  # wall times stay out of the machine report
