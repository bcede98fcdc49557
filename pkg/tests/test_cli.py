import json
import subprocess
import sys

import numpy as np
import pytest

from momlab import records
from momlab.cli import main
from momlab.protocols import TrajectoryRecord


def invoke(*argv):
    return main(list(argv))


# -- records ------------------------------------------------------------------


def test_csv_roundtrip(tmp_path):
    rec = TrajectoryRecord({"seed": 3, "params": {"L": 8, "qx": 0.25}})
    rec.add(1.0, "half_cut", 2.0)
    rec.add(2.0, "S_prof", 1.0, index=4)
    path = tmp_path / "r.csv"
    records.write_csv(path, [rec])
    rows = records.read_csv(path)
    assert rows[0] == {"seed": 3, "t": 1.0, "observable": "half_cut", "index": -1,
                       "value": 2.0, "L": "8", "qx": "0.25"}
    assert rows[1]["index"] == 4


def test_csv_schema_guard(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("seed,t\n")
    with pytest.raises(ValueError):
        records.read_csv(p)


# -- CLI ---------------------------------------------------------------------------


def test_cli_run_and_rerun_identical(tmp_path):
    args = ["run", "--ensemble", "factorizable", "--r", "2", "--qx", "0.4",
            "--qy", "0.4", "--qz", "0.2", "--L", "16", "--T", "16",
            "--seeds", "3", "--quiet", "--observables", "half_cut",
            "--out", str(tmp_path / "a.csv")]
    assert invoke(*args) == 0
    args2 = list(args)
    args2[-1] = str(tmp_path / "b.csv")
    assert invoke(*args2) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    sidecar = json.loads((tmp_path / "a.json").read_text())
    assert sidecar["n_jobs"] == 3
    assert "version" in sidecar


def test_cli_seed_streams_stable_under_seed_count(tmp_path):
    base = ["run", "--ensemble", "factorizable", "--r", "2", "--qx", "0.4",
            "--qy", "0.4", "--qz", "0.2", "--L", "16", "--T", "16", "--quiet",
            "--observables", "half_cut"]
    invoke(*base, "--seeds", "2", "--out", str(tmp_path / "two.csv"))
    invoke(*base, "--seeds", "4", "--out", str(tmp_path / "four.csv"))
    two = [r for r in records.read_csv(tmp_path / "two.csv")]
    four = [r for r in records.read_csv(tmp_path / "four.csv") if r["seed"] < 2]
    assert two == four


def test_cli_geometry_error_exit_code(tmp_path, capsys):
    rc = invoke("run", "--ensemble", "factorizable", "--r", "3", "--qx", "0.4",
                "--qy", "0.4", "--qz", "0.2", "--L", "2", "--T", "4",
                "--seeds", "1", "--quiet", "--out", str(tmp_path / "x.csv"))
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_cli_frustration_bipartite_json(tmp_path):
    rc = invoke("frustration", "--ensemble", "bipartite", "--pattern-a", "X",
                "--pattern-b", "ZZ", "--check", "bipartite",
                "--out", str(tmp_path / "v.json"))
    assert rc == 0
    verdict = json.loads((tmp_path / "v.json").read_text())
    assert verdict["bipartite"]["bipartite"] is True
    assert verdict["bipartite"]["coloring"]


def test_cli_frustration_odd_cycle(tmp_path):
    rc = invoke("frustration", "--file", str(_write_ens(tmp_path)),
                "--check", "bipartite", "--out", str(tmp_path / "v.json"))
    assert rc == 0
    verdict = json.loads((tmp_path / "v.json").read_text())
    assert verdict["bipartite"]["bipartite"] is False
    assert len(verdict["bipartite"]["odd_cycle"]) % 2 == 1


def _write_ens(tmp_path):
    p = tmp_path / "ens.txt"
    p.write_text("XXX 1\nYYY 1\nZZZ 1\n")
    return p


def test_cli_sweep_and_collapse(tmp_path):
    rc = invoke("sweep", "--ensemble", "factorizable", "--r", "2", "--qz", "0.0",
                "--param", "qx", "--values", "0.15,0.3,0.45,0.6",
                "--L", "12,16", "--T", "24", "--seeds", "6", "--quiet",
                "--observables", "i3", "--out", str(tmp_path / "sw.csv"))
    assert rc == 0
    rc = invoke("collapse", "--csv", str(tmp_path / "sw.csv"), "--fit", "crossing",
                "--param", "qx", "--n-boot", "20",
                "--out", str(tmp_path / "fit.json"))
    # a crossing may or may not exist at this scale; both paths must be clean
    assert rc in (0, 1)
    if rc == 0:
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert "crossing" in fit


def test_cli_graph_export(tmp_path):
    rc = invoke("frustration", "--ensemble", "bipartite", "--pattern-a", "X",
                "--pattern-b", "ZZ", "--check", "bipartite", "--window", "8",
                "--graph-out", str(tmp_path / "g.txt"),
                "--out", str(tmp_path / "v.json"))
    assert rc == 0
    lines = (tmp_path / "g.txt").read_text().splitlines()
    assert all(" " in ln and "," in ln for ln in lines)
    # X_i anticommutes with the pair operators at i-1 and i: degree 2 each
    assert len(lines) == 16


def test_cli_entrypoint_subprocess():
    out = subprocess.run([sys.executable, "-m", "momlab.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "momlab" in out.stdout


def test_cli_reproduce_smallest(tmp_path, monkeypatch):
    # shrink the smallest recipe so this stays a smoke test of the pipeline
    from momlab import recipes

    monkeypatch.setitem(
        recipes.RECIPES, "fig5c",
        lambda budget, outdir, workers, base_seed: _shrunk_fig5c(outdir, workers))
    rc = invoke("reproduce", "fig5c", "--budget", "small",
                "--out", str(tmp_path / "out"))
    assert rc == 0
    assert (tmp_path / "out" / "fig5c_fit.json").exists()
    assert (tmp_path / "out" / "fig5c_spec.json").exists()


def _shrunk_fig5c(outdir, workers):
    import numpy as np

    from momlab import analysis, records
    from momlab.recipes import _report, _rows, sweep_jobs
    from momlab.sweep import run_jobs

    desc = {"kind": "bipartite", "pattern_a": "X", "pattern_b": "ZZ",
            "delta": 0.0, "boundary": "periodic"}
    jobs = sweep_jobs("pure", desc, None, None, (64,), 20, 1,
                      opts_of=lambda v, L: {"observables": ("pofl",)})
    recs = run_jobs(jobs, workers)
    records.write_csv(outdir / "fig5c_X_ZZ.csv", recs)
    idx, mat = analysis.profile_window_means(_rows(recs), "pofl")
    mat = mat / np.maximum(mat.sum(axis=1, keepdims=True), 1e-300)
    fit = analysis.fit_power_law(idx, mat, window=(2, 16))
    _report(outdir, "fig5c_fit.json", {"X_ZZ": fit.to_json_dict()})
    return 0
