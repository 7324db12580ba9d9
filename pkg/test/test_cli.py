#!/usr/bin/env python
"""
Test script to verify the latwave command line: outputs, manifests, exit codes and the run registry
"""
import csv
import json
import os
import sys
import tempfile

import pytest

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from cli import RunManifest, _attach_negative_values
from database import RunStore
from main import run
from utils import sha256_file


def _load(out_dir, name):
    with open(os.path.join(out_dir, name)) as f:
        return json.load(f)


def test_newton_writes_report_and_manifest():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "newton", "--monomials", "2,2"]) == 0
        report = _load(tmp, "newton.json")
        assert report["distance"] == "2"
        assert {"support", "distance", "principal_face", "adapted"} <= set(report)
        manifest = RunManifest.load(os.path.join(tmp, "newton.manifest.json"))
        assert manifest.subcommand == "newton"
        assert manifest.outputs["newton.json"] == sha256_file(os.path.join(tmp, "newton.json"))
        assert manifest.params["monomials"] == "2,2"


def test_index_calculus_with_negative_values():
    with tempfile.TemporaryDirectory() as tmp:
        code = run(["--out", tmp, "--no-db", "index-calc", "combine",
                    "--alpha", "1/3,1/3,1/3", "--a", "-5/6,0", "--b", "-1,0"])
        assert code == 0
        assert _load(tmp, "index-calc.json") == {"op": "combine", "result": "-5/6,0"}


def test_attach_negative_values():
    assert _attach_negative_values(["--a", "-5/6,0", "--m", "3"]) == ["--a=-5/6,0", "--m", "3"]
    assert _attach_negative_values(["--b", "-.5"]) == ["--b=-.5"]
    assert _attach_negative_values(["--fit", "--verbose"]) == ["--fit", "--verbose"]


def test_green_at_time_zero():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "green", "--d", "2", "--t", "0", "--x", "3,4"]) == 0
        with open(os.path.join(tmp, "green.csv"), newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 1
        assert float(rows[0]["value"]) == 0.0


def test_sigma_scan_finds_the_k4_point():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "--threads", "1", "sigma-scan", "--k", "4", "--resolution", "2"]) == 0
        summary = _load(tmp, "sigma-scan.json")
        assert summary["scans"][0]["found"] == 1
        assert "omega" in summary


def test_quartic_and_adapted():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "quartic", "--coeffs", "1,0,0,0,1"]) == 0
        assert "label" in _load(tmp, "quartic.json")["class"]
        assert run(["--out", tmp, "--no-db", "adapted", "--expr", "z1**2*z2**2"]) == 0
        assert _load(tmp, "adapted.json")["status"] == "adapted"


def test_index_calculus_shift_and_max():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "index-calc", "shift", "--index", "-1,0", "--m", "1"]) == 0
        assert _load(tmp, "index-calc.json") == {"op": "shift", "result": "-3/2,0"}
        assert run(["--out", tmp, "--no-db", "index-calc", "max", "--indices", "-1,0;-1,1;-5/6,0"]) == 0
        assert _load(tmp, "index-calc.json") == {"op": "max", "result": "-5/6,0"}


def test_sup_decay_writes_series_and_fit():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "--threads", "1", "sup-decay", "--d", "2", "--t-range", "1", "10", "8"]) == 0
        with open(os.path.join(tmp, "sup-decay.csv"), newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["t", "x1", "x2", "value", "errEst", "orbit"]
        assert len(rows) == 9
        fit = _load(tmp, "sup-decay.json")
        assert {"beta", "p", "C", "window"} <= set(fit)
        manifest = RunManifest.load(os.path.join(tmp, "sup-decay.manifest.json"))
        assert set(manifest.outputs) == {"sup-decay.csv", "sup-decay.json"}


def test_oscint_plain_and_phase_list():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "--threads", "1", "oscint", "--phase", "D4", "--times", "10,20"]) == 0
        with open(os.path.join(tmp, "oscint.csv"), newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["phase_id", "t", "re", "im", "errEst"]
        assert [r[0] for r in rows[1:]] == ["D4", "D4"]
        report = _load(tmp, "oscint.json")
        assert report["phase"] == "D4"
        assert "fit" not in report and "stability" not in report
        assert run(["--out", tmp, "--no-db", "oscint", "--list-phases"]) == 0
        phases = {entry["id"] for entry in _load(tmp, "phases.json")}
        assert {"D4", "P4"} <= phases
        assert "phases.json" in RunManifest.load(os.path.join(tmp, "oscint.manifest.json")).outputs


def test_oscint_stability_replays_identically():
    with tempfile.TemporaryDirectory() as tmp:
        argv = ["--out", tmp, "--no-db", "--threads", "1", "--seed", "3", "oscint", "--expr", "z1**2", "--d", "1",
                "--t-range", "10", "100", "8", "--stability", "2"]
        assert run(argv) == 0
        stability = _load(tmp, "oscint.json")["stability"]
        assert stability["sampled"] == 2
        assert {tr["seed"] for tr in stability["trials"]} | set(stability["skipped"]) == {3, 4}
        path = os.path.join(tmp, "oscint.manifest.json")
        first = RunManifest.load(path)
        assert first.seed == 3
        assert run(["--replay", path]) == 0
        second = RunManifest.load(path)
        assert second.outputs == first.outputs
        assert second.params == first.params


def test_strichartz_with_doubling():
    with tempfile.TemporaryDirectory() as tmp:
        code = run(["--out", tmp, "--no-db", "--threads", "1", "strichartz", "--d", "2", "--q", "8", "--r", "inf",
                    "--L", "16", "--T", "2", "--samples", "2", "--doubling"])
        assert code == 0
        report = _load(tmp, "strichartz.json")
        assert report["admissible"] is True
        assert [rep["T"] for rep in report["reports"]] == [2.0, 4.0]
        assert all(len(rep["ratios"]) == 2 and rep["max_ratio"] > 0 for rep in report["reports"])


def test_nls_small_data_run():
    with tempfile.TemporaryDirectory() as tmp:
        code = run(["--out", tmp, "--no-db", "--threads", "1", "nls", "--d", "2", "--L", "16", "--T", "2",
                    "--steps", "40", "--data-bound", "2e-3"])
        assert code == 0
        summary = _load(tmp, "nls.json")
        assert summary["steps"] == 40
        assert summary["nonlinear"] is True
        assert summary["richardson"] is not None
        assert summary["decay_rate"] == 2.0 / 3.0
        assert summary["decay_bound"] > 0
        manifest = RunManifest.load(os.path.join(tmp, "nls.manifest.json"))
        assert manifest.params["eps"] == 1e-3
        assert manifest.params["data_bound"] == 2e-3
        assert set(manifest.outputs) == {"nls.csv", "nls.json"}


@pytest.mark.slow
def test_p4_appendix_with_oracle():
    with tempfile.TemporaryDirectory() as tmp:
        code = run(["--out", tmp, "--no-db", "--threads", "1", "p4-appendix",
                    "--l-range", "10", "100000", "9", "--oracle"])
        assert code == 0
        with open(os.path.join(tmp, "p4-appendix.csv"), newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["lambda", "re", "im", "K1", "K2", "errEst"]
        assert len(rows) == 10
        report = _load(tmp, "p4-appendix.json")
        assert len(report["results"]) == 9
        assert "plateau" in report
        assert [c["lambda"] for c in report["oracle"]] == [10.0]
        for check in report["oracle"]:
            assert check["difference"] <= check["tolerance"]


def test_usage_errors_exit_2():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "bogus"]) == 2
        assert run(["--out", tmp, "--no-db"]) == 2
        assert run(["--out", tmp, "--no-db", "newton"]) == 2
        assert run(["--out", tmp, "--no-db", "green", "--d", "2"]) == 2
        assert run(["--out", tmp, "--no-db", "strichartz", "--q", "2", "--r", "10/3", "--L", "8", "--T", "2"]) == 2
        assert not os.path.exists(os.path.join(tmp, "strichartz.manifest.json"))
        assert run(["--out", tmp, "--no-db", "adapted", "--expr", "z5**2"]) == 2
        assert run(["--out", tmp, "--no-db", "adapted", "--expr", "z1**2 + y"]) == 2
        assert run(["--out", tmp, "--no-db", "oscint", "--expr", "z1**2 + z3", "--d", "2", "--times", "5"]) == 2
        assert run(["--out", tmp, "--no-db", "nls", "--d", "2", "--L", "8", "--T", "1",
                    "--eps", "0.1", "--data-bound", "0.01"]) == 2
        assert not os.path.exists(os.path.join(tmp, "nls.manifest.json"))


def test_cost_guard_exits_3():
    with tempfile.TemporaryDirectory() as tmp:
        code = run(["--out", tmp, "--no-db", "oscint", "--expr", "z1**4+z2**4+z3**4+z4**4+z5**4",
                    "--d", "5", "--times", "10,20"])
        assert code == 3
        assert not os.path.exists(os.path.join(tmp, "oscint.manifest.json"))


def test_replay_reproduces_outputs():
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "newton", "--monomials", "4,0;0,4"]) == 0
        path = os.path.join(tmp, "newton.manifest.json")
        before = RunManifest.load(path).outputs
        assert run(["--replay", path]) == 0
        assert RunManifest.load(path).outputs == before
        assert run(["--replay", os.path.join(tmp, "missing.json")]) == 2


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("LATWAVE_SEED", "9")
    with tempfile.TemporaryDirectory() as tmp:
        assert run(["--out", tmp, "--no-db", "--seed", "5", "newton", "--monomials", "2,2"]) == 0
        assert RunManifest.load(os.path.join(tmp, "newton.manifest.json")).seed == 9


def test_config_file_defaults():
    with tempfile.TemporaryDirectory() as tmp:
        config = os.path.join(tmp, "latwave.cfg")
        with open(config, "w") as f:
            f.write("# defaults\nseed = 4\nmonomials = 2,2\n")
        assert run(["--out", tmp, "--no-db", "--config", config, "newton"]) == 0
        assert _load(tmp, "newton.json")["distance"] == "2"
        assert RunManifest.load(os.path.join(tmp, "newton.manifest.json")).seed == 4
        bad = os.path.join(tmp, "bad.cfg")
        with open(bad, "w") as f:
            f.write("seed 4\n")
        assert run(["--out", tmp, "--no-db", "--config", bad, "newton"]) == 2


def test_runs_are_recorded():
    with tempfile.TemporaryDirectory() as tmp:
        db = os.path.join(tmp, "runs.db")
        assert run(["--out", tmp, "--db", db, "newton", "--monomials", "2,2"]) == 0
        assert run(["--out", tmp, "--db", db, "newton"]) == 2
        runs = RunStore(db).list_runs()
        assert [r[1] for r in runs] == ["newton", "newton"]
        assert [r[7] for r in runs] == [2, 0]
        assert runs[0][8] is None
        assert run(["--db", db, "runs"]) == 0
        assert run(["--db", db, "runs", "--subcommand", "green"]) == 0
        assert len(RunStore(db).list_runs()) == 2
        assert run(["--no-db", "runs"]) == 2


if __name__ == "__main__":
    test_newton_writes_report_and_manifest()
    test_index_calculus_with_negative_values()
    test_green_at_time_zero()
    test_usage_errors_exit_2()
    print("All CLI tests passed!")
