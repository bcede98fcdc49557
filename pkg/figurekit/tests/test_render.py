import json
from pathlib import Path

import numpy as np
import pytest

from figurekit import FigureJob, SchemaError, render
from figurekit.cli import main

SCHEMA = "# schema=momlab-csv-1\n"


def write_sweep_csv(path, param="qx"):
    lines = [SCHEMA.strip(), f"seed,t,observable,index,value,L,T,{param}"]
    rng = np.random.default_rng(0)
    for L in (16, 32, 64):
        for v in (0.2, 0.25, 0.3, 0.35, 0.4):
            for seed in range(5):
                y = (v - 0.3) * L ** (1 / 1.1) + 0.1 * rng.standard_normal()
                lines.append(f"{seed},32.0,i3,-1,{y!r},{L},128.0,{v!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_pofl_csv(path):
    lines = [SCHEMA.strip(), "seed,t,observable,index,value,L,T"]
    for seed in range(3):
        for ell in range(1, 65):
            count = max(1, round(4000 * ell**-2.0))
            lines.append(f"{seed},64.0,pofl,{ell},{float(count)!r},128,256.0")
    Path(path).write_text("\n".join(lines) + "\n")


def write_lightcone_csv(path):
    lines = [SCHEMA.strip(), "seed,t,observable,index,value,L,T"]
    for t in range(0, 30, 2):
        for x in range(0, 31, 2):
            f = 2.0 if x >= 0.7 * t else 0.2
            lines.append(f"0,{float(t)!r},f,{x},{f!r},63,40.0")
            lines.append(f"0,{float(t)!r},fnorm,{x},{f/2.0!r},63,40.0")
    Path(path).write_text("\n".join(lines) + "\n")


def write_ternary_csv(path):
    lines = [SCHEMA.strip(), "seed,t,observable,index,value,L,T,qx,qy,qz"]
    pts = [(0.33, 0.33, 0.34, 4.0, 8.0), (0.8, 0.1, 0.1, 1.0, 1.1),
           (0.45, 0.45, 0.1, 2.0, 2.6)]
    for qx, qy, qz, s1, s2 in pts:
        for L, s in ((24, s1), (48, s2)):
            lines.append(f"0,64.0,half_cut,-1,{s!r},{L},96.0,{qx!r},{qy!r},{qz!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_code_csv(path):
    lines = [SCHEMA.strip(), "seed,t,observable,index,value,L,T"]
    for L in (32, 64):
        for t in np.linspace(0.5, 4 * L, 12):
            k = float(L / max(t, 1.0))
            lines.append(f"0,{float(t)!r},k,-1,{k!r},{L},{4.0*L!r}")
            lines.append(f"0,{float(t)!r},cd_mean,-1,{float(min(t, L/2))!r},{L},{4.0*L!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def test_crossing_render(tmp_path):
    csv = tmp_path / "sweep.csv"
    write_sweep_csv(csv)
    fit = tmp_path / "fit.json"
    fit.write_text(json.dumps({"crossing": {"estimate": 0.3, "stderr": 0.01}}))
    out = render(FigureJob("crossing", [str(csv)], str(tmp_path / "c.png"),
                           {"param": "qx", "fit": str(fit)}))
    assert out.exists() and out.stat().st_size > 2000


def test_collapse_render(tmp_path):
    csv = tmp_path / "sweep.csv"
    write_sweep_csv(csv)
    out = render(FigureJob("collapse", [str(csv)], str(tmp_path / "c.png"),
                           {"param": "qx", "qc": 0.3, "nu": 1.1}))
    assert out.exists()


def test_pofl_render(tmp_path):
    csv = tmp_path / "p.csv"
    write_pofl_csv(csv)
    out = render(FigureJob("loglog-Pofl", [str(csv)], str(tmp_path / "p.png")))
    assert out.exists()


def test_lightcone_render(tmp_path):
    csv = tmp_path / "lc.csv"
    write_lightcone_csv(csv)
    out = render(FigureJob("lightcone-heatmap", [str(csv)], str(tmp_path / "lc.png")))
    assert out.exists()


def test_ternary_render(tmp_path):
    csv = tmp_path / "t.csv"
    write_ternary_csv(csv)
    out = render(FigureJob("ternary-phase-diagram", [str(csv)],
                           str(tmp_path / "t.png")))
    assert out.exists()


def test_code_metrics_render(tmp_path):
    csv = tmp_path / "k.csv"
    write_code_csv(csv)
    out = render(FigureJob("code-metrics", [str(csv)], str(tmp_path / "k.png")))
    assert out.exists()


def test_render_deterministic(tmp_path):
    csv = tmp_path / "sweep.csv"
    write_sweep_csv(csv)
    job_a = FigureJob("crossing", [str(csv)], str(tmp_path / "a.png"), {"param": "qx"})
    job_b = FigureJob("crossing", [str(csv)], str(tmp_path / "b.png"), {"param": "qx"})
    render(job_a)
    render(job_b)
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_render_never_mutates_inputs(tmp_path):
    csv = tmp_path / "sweep.csv"
    write_sweep_csv(csv)
    before = csv.read_bytes()
    render(FigureJob("crossing", [str(csv)], str(tmp_path / "c.png"), {"param": "qx"}))
    assert csv.read_bytes() == before


def test_schema_error_names_columns(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=momlab-csv-1\nwrong,cols\n1,2\n")
    with pytest.raises(SchemaError, match="columns"):
        render(FigureJob("crossing", [str(bad)], str(tmp_path / "x.png")))
    worse = tmp_path / "worse.csv"
    worse.write_text("no header\n")
    with pytest.raises(SchemaError, match="schema"):
        render(FigureJob("loglog-Pofl", [str(worse)], str(tmp_path / "x.png")))


def test_missing_param_column_diagnostic(tmp_path):
    csv = tmp_path / "noparam.csv"
    csv.write_text("# schema=momlab-csv-1\nseed,t,observable,index,value\n"
                   "0,1.0,i3,-1,0.5\n")
    with pytest.raises(SchemaError, match="missing parameter"):
        render(FigureJob("crossing", [str(csv)], str(tmp_path / "x.png"),
                         {"param": "qx"}))


def test_unknown_kind(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        render(FigureJob("pie-chart", [], str(tmp_path / "x.png")))


def test_cli_with_job_file(tmp_path):
    csv = tmp_path / "sweep.csv"
    write_sweep_csv(csv)
    job = {"kind": "collapse", "inputs": [str(csv)],
           "output": str(tmp_path / "out.png"),
           "options": {"param": "qx", "qc": 0.3, "nu": 1.1}}
    jp = tmp_path / "job.json"
    jp.write_text(json.dumps(job))
    assert main(["--job", str(jp)]) == 0
    assert (tmp_path / "out.png").exists()


def test_cli_flags_and_error_path(tmp_path, capsys):
    csv = tmp_path / "p.csv"
    write_pofl_csv(csv)
    rc = main(["--kind", "loglog-Pofl", "--csv", str(csv),
               "--out", str(tmp_path / "p.svg")])
    assert rc == 0 and (tmp_path / "p.svg").exists()
    rc = main(["--kind", "crossing", "--csv", str(tmp_path / "nope.csv"),
               "--out", str(tmp_path / "x.png")])
    assert rc == 1
    assert "error" in capsys.readouterr().err
