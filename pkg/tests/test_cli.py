"""Command-line interface: output formats, exit codes, config files."""

import csv
import io
import json
import math

import pytest
from click.testing import CliRunner

from ptaseplab.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_bethe_csv_output(runner):
    res = runner.invoke(main, ["bethe", "--L", "6", "--N", "2", "--z", "0.4+0.1j"])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(io.StringIO(res.output)))
    assert len(rows) == 6
    sides = [r["side"] for r in rows]
    assert sides.count("left") == 4 and sides.count("right") == 2
    assert all(float(r["residual"]) < 1e-10 for r in rows)


def test_bethe_rejects_unit_modulus(runner):
    res = runner.invoke(main, ["bethe", "--L", "6", "--N", "2", "--z", "1.0"])
    assert res.exit_code == 2


def test_prob_json_fredholm(runner):
    res = runner.invoke(main, [
        "prob", "--L", "4", "--N", "2", "--ic", "step",
        "--obs", "1,0.8,0", "--obs", "2,1.5,1",
    ])
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert math.isclose(float(doc["probability"]), 0.1912078645889842, abs_tol=1e-8)
    assert "provenance" in doc
    assert doc["provenance"]["n_nodes"] == 16


def test_prob_ctmc_engine(runner):
    res = runner.invoke(main, [
        "prob", "--L", "4", "--N", "2", "--ic", "step",
        "--obs", "1,0.8,0", "--obs", "2,1.5,1", "--engine", "ctmc",
    ])
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert math.isclose(float(doc["probability"]), 0.1912078645889842, abs_tol=1e-9)


def test_prob_compare_engines(runner):
    res = runner.invoke(main, [
        "prob", "--L", "4", "--N", "2", "--ic", "flat", "--d", "2",
        "--obs", "1,0.9,-1", "--compare", "--samples", "20000",
    ])
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert set(doc["probability"]) >= {"fredholm", "toeplitz", "ctmc", "mc"}
    assert max(float(v) for v in doc["pairwise_deviation"].values()) < 0.02


def test_prob_rejects_bad_observation_order(runner):
    res = runner.invoke(main, [
        "prob", "--L", "4", "--N", "2",
        "--obs", "1,2.0,0", "--obs", "2,1.0,0",
    ])
    assert res.exit_code == 2


def test_limit_csv(runner):
    res = runner.invoke(main, [
        "limit", "--kind", "step", "--x", "-1,0,1", "--tau", "1", "--gamma", "0.5",
    ])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(io.StringIO(res.output)))
    vals = [float(r["F"]) for r in rows]
    assert [float(r["x"]) for r in rows] == [-1.0, 0.0, 1.0]
    assert vals[0] < vals[1] < vals[2]
    assert math.isclose(vals[1], 0.9681132, abs_tol=1e-5)


def test_limit_stepflat_requires_mu(runner):
    res = runner.invoke(main, ["limit", "--kind", "stepflat", "--x", "0"])
    assert res.exit_code == 2


def test_identity_json_lines(runner):
    res = runner.invoke(main, ["identity", "--count", "5", "--seed", "1"])
    assert res.exit_code == 0, res.output
    lines = [ln for ln in res.output.strip().splitlines() if ln]
    docs = [json.loads(ln) for ln in lines]
    assert len(docs) == 6  # five instances plus a summary line
    assert all(float(d["rel_err"]) < 1e-9 for d in docs[:-1])
    assert "max_rel_err" in docs[-1]


def test_identity_threshold_exit_code(runner):
    res = runner.invoke(main, [
        "identity", "--count", "3", "--seed", "1", "--threshold", "1e-30",
    ])
    assert res.exit_code == 4


def test_config_file_overrides(runner, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"L": 6, "N": 2, "z_norm": "0.3"}))
    res = runner.invoke(main, ["bethe", "--config", str(cfg)])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(io.StringIO(res.output)))
    assert len(rows) == 6


def test_output_file(runner, tmp_path):
    out = tmp_path / "roots.csv"
    res = runner.invoke(main, [
        "bethe", "--L", "4", "--N", "1", "--z", "0.2", "--output", str(out),
    ])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
