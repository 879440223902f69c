import json
import os

import numpy as np
import pytest

from epsensor import ConfigurationError
from epsensor.cli import main
from epsensor.scenarios import (apply_sweep_value, fmt, load_scenario,
                                parse_grid, parse_scenario, run_scenario)

MINIMAL = """
name = demo
experiment = spectrum_sweep
n = 3
m = 1
g = 1.0
kappa = 1.0
sweep_param = g1
sweep_grid = linspace:0.9:1.1:5
output = demo.csv
"""


def test_parse_minimal_scenario():
    scn = parse_scenario(MINIMAL)
    assert scn.name == "demo"
    assert scn.system.n == 3
    assert np.allclose(scn.sweep_grid, (0.9, 0.95, 1.0, 1.05, 1.1))


def test_parse_grid_forms():
    assert parse_grid("1, 2, 3.5") == (1.0, 2.0, 3.5)
    assert parse_grid("linspace:0:1:3") == (0.0, 0.5, 1.0)
    assert np.allclose(parse_grid("logspace:-2:0:3"), (0.01, 0.1, 1.0))
    with pytest.raises(ConfigurationError):
        parse_grid("linspace:0:1")
    with pytest.raises(ConfigurationError):
        parse_grid("")


@pytest.mark.parametrize("mutation,fragment", [
    ("experiment = warp_drive", "experiment"),
    ("sweep_param = q7", "sweep_param"),
    ("sweep_grid = 1, 1, 2", "monotone"),
    ("format = yaml", "format"),
    ("n = 3\nn = 4", "duplicate"),
    ("mystery_key = 1", "unknown"),
    ("g = -1.0", "system"),
])
def test_parse_errors_name_the_field(mutation, fragment):
    key = mutation.split("=")[0].strip().splitlines()[0]
    if any(line.startswith(key + " ") for line in MINIMAL.splitlines()):
        text = "\n".join(mutation if line.startswith(key + " ") else line
                         for line in MINIMAL.splitlines())
    else:
        text = MINIMAL + mutation + "\n"
    with pytest.raises(ConfigurationError, match=fragment):
        parse_scenario(text)


def test_apply_sweep_value_paths():
    scn = parse_scenario(MINIMAL)
    cfg = scn.system
    assert apply_sweep_value(cfg, "g1", 0.5).g == (0.5,)
    assert apply_sweep_value(cfg, "delta2", 0.25).delta == (0.0, 0.25)
    assert apply_sweep_value(cfg, "gamma", 0.1).gamma == 0.1
    assert apply_sweep_value(cfg, "eps_same", 1e-3).epsilon == (1e-3, 1e-3)


def test_fmt_is_17_digit_stable():
    assert fmt(1 / 3) == "0.33333333333333331"
    assert fmt(True) == "true"
    assert fmt(2) == "2"


def test_run_scenario_is_deterministic(tmp_path):
    scn = parse_scenario(MINIMAL)
    first = run_scenario(scn, out_dir=str(tmp_path / "a"))
    second = run_scenario(scn, out_dir=str(tmp_path / "b"))
    data_a = open(first["output"], "rb").read()
    data_b = open(second["output"], "rb").read()
    assert data_a == data_b
    assert b"# name = demo" in data_a
    assert b"# sweep_grid = " in data_a          # header echoes resolved params


def test_atomic_write_leaves_no_temp_files(tmp_path):
    scn = parse_scenario(MINIMAL)
    run_scenario(scn, out_dir=str(tmp_path))
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]
    assert leftovers == []
    assert (tmp_path / "demo.csv").exists()


def test_json_format_override(tmp_path):
    scn = parse_scenario(MINIMAL)
    res = run_scenario(scn, out_dir=str(tmp_path), out_format="json")
    assert res["output"].endswith(".json")
    doc = json.loads(open(res["output"]).read())
    assert doc["meta"]["name"] == "demo"
    assert doc["columns"][0] == "g1"
    assert len(doc["rows"]) == 5


def test_cli_run_and_rerun_byte_identical(tmp_path):
    scn_path = tmp_path / "demo.scn"
    scn_path.write_text(MINIMAL)
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    assert main(["run", str(scn_path), "--out", str(out1)]) == 0
    assert main(["run", str(scn_path), "--out", str(out2)]) == 0
    assert (out1 / "demo.csv").read_bytes() == (out2 / "demo.csv").read_bytes()


def test_cli_reports_config_error(tmp_path, capsys):
    scn_path = tmp_path / "bad.scn"
    scn_path.write_text(MINIMAL.replace("experiment = spectrum_sweep",
                                        "experiment = nope"))
    code = main(["run", str(scn_path)])
    assert code == 2
    assert "experiment" in capsys.readouterr().err


def test_cli_jobs_parallel_matches_serial(tmp_path):
    paths = []
    for i, grid in enumerate(("linspace:0.9:1.1:5", "linspace:0.5:0.8:4")):
        text = MINIMAL.replace("linspace:0.9:1.1:5", grid) \
            .replace("name = demo", f"name = demo{i}") \
            .replace("output = demo.csv", f"output = demo{i}.csv")
        p = tmp_path / f"s{i}.scn"
        p.write_text(text)
        paths.append(str(p))
    assert main(["run", *paths, "--out", str(tmp_path / "ser")]) == 0
    assert main(["run", *paths, "--jobs", "2", "--out", str(tmp_path / "par")]) == 0
    for i in range(2):
        assert (tmp_path / "ser" / f"demo{i}.csv").read_bytes() == \
            (tmp_path / "par" / f"demo{i}.csv").read_bytes()


def test_all_example_scenarios_parse():
    here = os.path.join(os.path.dirname(__file__), "..", "scenarios")
    names = sorted(f for f in os.listdir(here) if f.endswith(".scn"))
    assert len(names) >= 8
    experiments = set()
    for name in names:
        scn = load_scenario(os.path.join(here, name))
        experiments.add(scn.experiment)
    assert experiments == {"spectrum_sweep", "discriminant_map", "puiseux",
                           "evolve_trace", "sensitivity_sweep", "qfi_trace",
                           "scaling", "loss_sweep"}


def test_spectrum_sweep_branches_are_continuous(tmp_path):
    scn = parse_scenario(MINIMAL.replace("linspace:0.9:1.1:5",
                                         "linspace:0.8:1.2:41"))
    res = run_scenario(scn, out_dir=str(tmp_path))
    rows = [line for line in open(res["output"]).read().splitlines()
            if line and not line.startswith("#")][1:]
    data = np.array([[float(x) if i < 7 else 0 for i, x in
                      enumerate(r.split(","))][:7] for r in rows])
    # nearest-neighbor matching keeps each branch's increments at the
    # physical square-root-collapse scale, far below a branch-swap jump
    for col in range(1, 4):
        steps = np.abs(np.diff(data[:, col]))
        assert steps.max() < 0.2


def test_evolve_trace_scenario(tmp_path):
    text = """
name = trace
experiment = evolve_trace
n = 3
m = 1
g = 0.95
kappa = 1.0
alpha = 2j, -2j
observable = X1-X2
sweep_grid = linspace:0.5:20:8
output = trace.csv
"""
    res = run_scenario(parse_scenario(text), out_dir=str(tmp_path))
    lines = open(res["output"]).read().splitlines()
    header = [line for line in lines if not line.startswith("#")][0]
    assert header.split(",") == ["t", "mean_obs", "var_obs", "n1", "n2", "n3",
                                 "n_total"]


def test_sensitivity_sweep_schema(tmp_path):
    text = """
name = sens
experiment = sensitivity_sweep
n = 3
m = 1
g = 0.95
kappa = 1.0
alpha = 2j, -2j
observable = X1-X2
sweep_param = g1
sweep_grid = 0.9, 0.95
time = working:1
output = sens.csv
"""
    res = run_scenario(parse_scenario(text), out_dir=str(tmp_path))
    lines = open(res["output"]).read().splitlines()
    header = [line for line in lines if not line.startswith("#")][0]
    assert header == ("g,kappa,alpha,gamma,Gamma,eta,t,chi,observable,"
                      "susceptibility,noise_var,delta_eps,qfi,qcrb,sql,"
                      "valid_regime")


def test_accept_subset_cli(tmp_path, capsys):
    code = main(["accept", "--only", "9", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS criterion 9" in out
    report = json.loads((tmp_path / "acceptance_report.json").read_text())
    assert report["criteria"][0]["id"] == 9
    assert report["passed"]
