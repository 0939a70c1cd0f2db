import json

import numpy as np
import pytest
from click.testing import CliRunner

from riemflow import io
from riemflow.cli import REPORT_COLUMNS, main

FAST = ["--T", "30", "--n", "5", "--m", "12"]


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    res = runner.invoke(main, args, catch_exceptions=False)
    assert res.exit_code == 0, res.output
    return res


def test_help(runner):
    out = invoke(runner, ["--help"]).output
    for cmd in ("gen", "run", "sweep", "diagnose", "report"):
        assert cmd in out


@pytest.mark.parametrize("fmt", ["csv", "bin"])
def test_gen(runner, tmp_path, fmt):
    res = invoke(runner, ["gen", "--problem", "karcher", "--n", "3", "--m", "2", "--out", str(tmp_path), "--format", fmt])
    meta = io.read_json(tmp_path / "instance.json")
    assert f"fstar={meta['fstar']!r}" in res.output
    assert len(list((tmp_path / "matrices").iterdir())) == 2


def test_run_then_diagnose(runner, tmp_path):
    invoke(runner, ["run", "--problem", "eigenvalue", "--alpha", "3", "--out", str(tmp_path)] + FAST)
    manifest = io.read_json(tmp_path / "manifest.json")
    (entry,) = manifest["runs"]
    assert entry["status"] == "ok"
    states = (tmp_path / entry["files"]["states"]).read_text().splitlines()
    assert len(states) == len(io.read_csv(tmp_path / entry["files"]["trajectory"])["t"])
    before = io.read_csv(tmp_path / entry["files"]["diagnostics"])
    res = invoke(runner, ["diagnose", "--run", str(tmp_path)])
    summary = json.loads(res.output)
    assert summary["runs"][0]["alpha"] == 3.0
    after = io.read_csv(tmp_path / entry["files"]["diagnostics"])
    # states are dumped at full precision, so re-diagnosis reproduces the energies
    np.testing.assert_allclose(after["W"], before["W"], rtol=1e-12, atol=1e-15)


def test_diagnose_with_overridden_curvature(runner, tmp_path):
    invoke(runner, ["run", "--problem", "karcher", "--alpha", "2", "--out", str(tmp_path), "--T", "10", "--n", "3", "--m", "3"])
    res = invoke(runner, ["diagnose", "--run", str(tmp_path), "--kmin", "-0.5"])
    assert json.loads(res.output)["curvature_profile"]["k_min"] == -0.5


def test_sweep_and_report(runner, tmp_path):
    out = tmp_path / "sw"
    invoke(runner, ["sweep", "--problem", "flat", "--alphas", "1,3,5", "--out", str(out), "--T", "50"])
    res = invoke(runner, ["report", "--sweep", str(out), "--delimiter", "comma"])
    lines = res.output.strip().splitlines()
    assert lines[0].split(",") == REPORT_COLUMNS
    assert [float(line.split(",")[0]) for line in lines[1:]] == [1.0, 3.0, 5.0]
    assert (out / "report.csv").read_text() == res.output


def test_sweep_default_alphas_and_saved_instance(runner, tmp_path):
    invoke(runner, ["gen", "--problem", "flat", "--n", "3", "--out", str(tmp_path / "inst")])
    out = tmp_path / "sw"
    invoke(runner, ["sweep", "--problem", "flat", "--instance", str(tmp_path / "inst"), "--out", str(out), "--T", "5"])
    manifest = io.read_json(out / "manifest.json")
    assert len(manifest["runs"]) > 1
    assert manifest["instance"]["hash"] == io.read_json(tmp_path / "inst" / "instance.json")["hash"]


def test_empty_alpha_list(runner, tmp_path):
    invoke(runner, ["sweep", "--problem", "flat", "--alphas", "", "--out", str(tmp_path)])
    assert io.read_json(tmp_path / "manifest.json")["runs"] == []


def test_bad_option_is_a_usage_error(runner, tmp_path):
    res = runner.invoke(main, ["run", "--alpha", "-1", "--out", str(tmp_path)])
    assert res.exit_code == 2 and "alpha must be positive" in res.output
    res = runner.invoke(main, ["run", "--alpha", "1", "--dt", "0", "--out", str(tmp_path)])
    assert res.exit_code == 2 and "positive" in res.output
    res = runner.invoke(main, ["sweep", "--problem", "nope", "--out", str(tmp_path)])
    assert res.exit_code == 2
