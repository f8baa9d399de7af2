import json

import numpy as np
import pytest

from tailgrid.cli import main
from tailgrid.io import load_paths_csv


@pytest.fixture
def paths_csv(tmp_path):
    out = tmp_path / "paths.csv"
    rc = main(["simulate", "--model", "pareto-power", "--gamma", "constant:0.5",
               "--n", "300", "--grid", "uniform:8", "--seed", "5",
               "--out", str(out)])
    assert rc == 0
    return out


def test_simulate_writes_loadable_paths(paths_csv):
    grid, x = load_paths_csv(paths_csv)
    assert x.shape == (300, 9)
    assert len(grid) == 9
    assert np.all(x >= 1.0)


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--model", "exp-gaussian", "--gamma", "holder:0.2,0.4,1.0",
            "--cov", "exponential:0.25,0.2", "--n", "50", "--grid", "uniform:4",
            "--seed", "9"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_margins_with_true_columns(paths_csv, tmp_path):
    out = tmp_path / "margins.csv"
    rc = main(["margins", "--in", str(paths_csv), "--k", "17",
               "--eval-points", "21", "--out", str(out),
               "--model", "pareto-power", "--gamma", "constant:0.5"])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,gamma_hat,a_hat,u_hat,gamma_true,a_true,u_true,std_err_gamma"
    assert len(lines) == 22
    row = lines[1].split(",")
    assert float(row[4]) == pytest.approx(0.5)  # gamma_true
    assert float(row[7]) > 0.0  # std_err_gamma

def test_margins_without_model_leaves_true_columns_empty(paths_csv, tmp_path):
    out = tmp_path / "margins.csv"
    assert main(["margins", "--in", str(paths_csv), "--k", "17",
                 "--eval-points", "5", "--out", str(out)]) == 0
    row = out.read_text().strip().splitlines()[1].split(",")
    assert row[4] == "" and row[5] == "" and row[6] == ""


def test_expmeasure_outputs(tmp_path):
    paths = tmp_path / "paths.csv"
    assert main(["simulate", "--model", "complete-dependence", "--gamma",
                 "constant:1.0", "--n", "400", "--grid", "uniform:6",
                 "--seed", "3", "--out", str(paths)]) == 0
    sets = tmp_path / "sets.json"
    sets.write_text(json.dumps([
        {"id": "min2", "kind": "min-exceedance",
         "locations": [0.0, 0.5, 1.0], "level": 2.0},
        {"id": "pt", "kind": "pointwise-exceedance", "locations": [0.5],
         "level": 3.0},
    ]))
    out = tmp_path / "nu.csv"
    rc = main(["expmeasure", "--in", str(paths), "--k", "20", "--c", "1.0",
               "--test-sets", str(sets), "--reference", "complete-dependence",
               "--reference-atoms", "64", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "set_id,nu_hat,nu_ref,abs_err,dc"
    assert lines[1].startswith("min2,")
    assert lines[-1].startswith("dc_summary,")
    dc = float(lines[-1].split(",")[4])
    assert 0.0 <= dc < 2.0


def test_check_conditions_report(tmp_path):
    out = tmp_path / "report.json"
    rc = main(["check-conditions", "--model", "pareto-power", "--gamma",
               "holder:0.2,0.4,1.0", "--n", "1000", "--k", "31",
               "--grid", "uniform:10", "--lambda", "one", "--reps", "200",
               "--seed", "7", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    ids = [r["condition_id"] for r in report["reports"]]
    assert ids == ["gamma-smoothness", "scale-smoothness", "location-smoothness",
                   "gpd-approximation", "extreme-fluctuation", "neighbor-ordering"]
    assert report["mesh_recommendation"]["bound"] > 0


def test_experiment_command(tmp_path):
    cfg = {
        "model": {"kind": "pareto-power",
                  "gamma": {"kind": "constant", "value": 0.5}},
        "n_schedule": [200, 400],
        "k_rule": {"kind": "power", "theta": 0.5},
        "grid_rule": {"kind": "uniform", "cells": 5},
        "replicates": 2,
        "seed": 1,
        "targets": ["margins"],
        "out_dir": str(tmp_path / "results"),
    }
    cfg_file = tmp_path / "config.json"
    cfg_file.write_text(json.dumps(cfg))
    assert main(["experiment", "--config", str(cfg_file), "--threads", "2"]) == 0
    results = tmp_path / "results"
    assert (results / "replicates.csv").exists()
    agg = json.loads((results / "aggregate.json").read_text())
    assert agg["replicates"] == 2
    echo = json.loads((results / "config-echo.json").read_text())
    assert echo["n_schedule"] == [200, 400]


def test_error_reporting(tmp_path, capsys):
    rc = main(["simulate", "--model", "pareto-power", "--gamma", "bogus:1",
               "--n", "10", "--grid", "uniform:2", "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_rough_gamma_cli_spec(tmp_path):
    out = tmp_path / "rough.csv"
    rc = main(["simulate", "--model", "pareto-power", "--gamma", "rough:0.8,0.3,31",
               "--n", "1000", "--grid", "uniform:6", "--seed", "2",
               "--out", str(out)])
    assert rc == 0
    grid, x = load_paths_csv(out)
    assert x.shape == (1000, 7)
