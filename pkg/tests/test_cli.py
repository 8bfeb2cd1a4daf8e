import json
import math

import numpy as np
import pytest

from isinglearn.cli import main, sweep_config_from_file
from isinglearn.graphs import make_tree, read_graph, write_graph
from isinglearn.ising import read_samples


@pytest.fixture
def tree_graph_file(tmp_path):
    path = tmp_path / "tree.txt"
    write_graph(make_tree(7, "path"), path)
    return path


def test_sample_then_learn_thr(tmp_path, tree_graph_file):
    samples = tmp_path / "s.txt"
    rc = main(
        [
            "sample",
            "--graph", str(tree_graph_file),
            "--theta", "0.6",
            "--n", "4000",
            "--burn-in", "300",
            "--thin", "3",
            "--seed", "5",
            "--out", str(samples),
            "--corr-out", str(tmp_path / "c.csv"),
        ]
    )
    assert rc == 0
    s = read_samples(samples)
    assert s.n == 4000 and s.p == 7

    out = tmp_path / "learned.txt"
    rc = main(
        [
            "learn",
            "--alg", "thr",
            "--samples", str(samples),
            "--theta", "0.6",
            "--out", str(out),
        ]
    )
    assert rc == 0
    assert read_graph(out).edges == make_tree(7, "path").edges
    corr_lines = (tmp_path / "c.csv").read_text().splitlines()
    assert corr_lines[0] == "0,1,2,3,4,5,6"


def test_learn_rlr_writes_diagnostics(tmp_path, tree_graph_file):
    samples = tmp_path / "s.txt"
    main(
        [
            "sample",
            "--graph", str(tree_graph_file),
            "--theta", "0.6",
            "--n", "3000",
            "--burn-in", "300",
            "--thin", "3",
            "--seed", "1",
            "--out", str(samples),
        ]
    )
    out = tmp_path / "learned.txt"
    diag = tmp_path / "diag.jsonl"
    rc = main(
        [
            "learn",
            "--alg", "rlr",
            "--samples", str(samples),
            "--lambda", "0.05",
            "--rule", "and",
            "--out", str(out),
            "--diag", str(diag),
        ]
    )
    assert rc == 0
    recs = [json.loads(line) for line in diag.read_text().splitlines()]
    assert len(recs) == 7
    assert all(r["converged"] for r in recs)
    assert {"vertex", "objective", "residual", "neighbors"} <= set(recs[0])


def test_learn_ind_defaults_from_theta(tmp_path):
    g = make_tree(5, "path")
    gpath = tmp_path / "g.txt"
    write_graph(g, gpath)
    samples = tmp_path / "s.txt"
    main(
        [
            "sample",
            "--graph", str(gpath),
            "--theta", "0.8",
            "--n", "8000",
            "--burn-in", "400",
            "--thin", "4",
            "--seed", "2",
            "--out", str(samples),
        ]
    )
    out = tmp_path / "learned.txt"
    rc = main(
        [
            "learn",
            "--alg", "indd",
            "--samples", str(samples),
            "--theta", "0.8",
            "--delta", "2",
            "--out", str(out),
        ]
    )
    assert rc == 0
    assert read_graph(out).edges == g.edges


def test_learn_missing_params_errors(tmp_path, tree_graph_file):
    samples = tmp_path / "s.txt"
    main(
        [
            "sample",
            "--graph", str(tree_graph_file),
            "--theta", "0.4",
            "--n", "50",
            "--burn-in", "20",
            "--thin", "1",
            "--seed", "0",
            "--out", str(samples),
        ]
    )
    rc = main(["learn", "--alg", "rlr", "--samples", str(samples),
               "--out", str(tmp_path / "x.txt")])
    assert rc == 2


def test_analyze_incoherence_json(tmp_path, tree_graph_file):
    out = tmp_path / "rep.json"
    rc = main(
        [
            "analyze", "incoherence",
            "--graph", str(tree_graph_file),
            "--theta", "0.5",
            "--root", "4",
            "--out", str(out),
        ]
    )
    assert rc == 0
    rep = json.loads(out.read_text())
    assert rep["root"] == 4
    assert rep["norm"] == pytest.approx(math.tanh(0.5), abs=1e-10)
    assert len(rep["q_ss"]) == 2


def test_analyze_tree_limit_json(tmp_path):
    out = tmp_path / "limit.json"
    rc = main(
        ["analyze", "tree-limit", "--delta", "4", "--theta", "0.6", "--out", str(out)]
    )
    assert rc == 0
    rep = json.loads(out.read_text())
    assert rep["h_star"] > 0
    assert rep["incoherence_limit"] > 1.0


def test_analyze_sweeps(tmp_path, tree_graph_file):
    bpath = tmp_path / "b.csv"
    rc = main(
        [
            "analyze", "b-sweep",
            "--delta", "4",
            "--theta-min", "0.30",
            "--theta-max", "0.60",
            "--points", "7",
            "--out", str(bpath),
        ]
    )
    assert rc == 0
    lines = bpath.read_text().splitlines()
    assert lines[0] == "theta,b_limit"
    assert lines[1].endswith("nan")  # below the field onset
    assert len(lines) == 8

    xpath = tmp_path / "x.csv"
    rc = main(
        [
            "analyze", "x-sweep",
            "--delta", "3",
            "--theta-min", "0.2",
            "--theta-max", "0.8",
            "--points", "4",
            "--out", str(xpath),
        ]
    )
    assert rc == 0
    assert xpath.read_text().splitlines()[0] == "theta,x_delta"

    ipath = tmp_path / "inc.csv"
    rc = main(
        [
            "analyze", "incoherence-sweep",
            "--graph", str(tree_graph_file),
            "--root", "4",
            "--theta-min", "0.2",
            "--theta-max", "0.6",
            "--points", "3",
            "--out", str(ipath),
        ]
    )
    assert rc == 0
    rows = ipath.read_text().splitlines()
    assert rows[0] == "theta,incoherence"
    th, val = rows[1].split(",")
    assert float(val) == pytest.approx(math.tanh(float(th)), abs=1e-9)


def test_sweep_from_config_file(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    out = tmp_path / "sweep.csv"
    cfg.write_text(
        "\n".join(
            [
                "# tiny smoke sweep",
                "family = tree",
                "p = 6",
                "shape = path",
                "learner = thr",
                "tau_rule = tree",
                "theta_grid = 0.6",
                "n_grid = 800",
                "trials = 3",
                "seed = 4",
                "burn_in = 100",
                "thin = 2",
                f"out = {out}",
            ]
        )
    )
    parsed = sweep_config_from_file(cfg)
    assert parsed.family.family == "tree"
    assert parsed.trials == 3
    rc = main(["sweep", "--config", str(cfg)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "theta,lambda0,n,trials,p_succ,p_vertex,mean_runtime_ms"


def test_reproduce_cli(tmp_path):
    rc = main(["reproduce", "thresholds", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "thresholds.md").exists()
