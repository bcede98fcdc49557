"""Canned parameter studies mirroring the headline result figures.

Each recipe expands a budget preset into sweep jobs, runs them, writes the
CSV plus a JSON report of the fitted quantities into the output directory.
Budgets trade seeds and sizes against wall-clock: ``paper`` matches the
published scale (hundreds of realizations, L up to 512), ``medium`` is a
desk-scale afternoon, ``small`` is a quick look.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import analysis, records
from .sweep import Job, run_jobs


def apply_param(desc: dict, param: str, value: float) -> dict:
    d = dict(desc)
    if param == "qx":
        qz = d["q"][3]
        d["q"] = [0.0, float(value), 1.0 - float(value) - qz, qz]
    elif param == "delta":
        d["delta"] = float(value)
    elif param == "n":
        ns = int(np.floor(value + 1e-12))
        d["n_star"] = ns
        d["epsilon"] = float(value) - ns
    elif param == "pz":
        d["p_z"] = float(value)
    else:
        raise ValueError(f"unknown ensemble parameter {param!r}")
    return d


def sweep_jobs(protocol: str, base_desc: dict | None, param: str | None, values,
               sizes, seeds: int, base_seed: int, T_of_L=None, opts_of=None):
    """Cartesian job list over values x sizes x seeds with stable indexing."""
    jobs = []
    point = 0
    values = list(values) if values is not None else [None]
    for value in values:
        for L in sizes:
            T = (T_of_L(L) if T_of_L else 4.0 * L)
            desc = base_desc
            if base_desc is not None and param is not None:
                desc = apply_param(base_desc, param, value)
            opts = dict(opts_of(value, L)) if opts_of else {}
            params = {"L": L, "T": T}
            if value is not None:
                params[param] = float(value)
            for s in range(seeds):
                jobs.append(Job(len(jobs), protocol, desc, L, T, base_seed,
                                point, s, params, opts))
            point += 1
    return jobs


def _report(outdir: Path, name: str, payload: dict) -> None:
    records.write_json(outdir / name, payload)


def _run_and_write(outdir: Path, name: str, jobs, workers):
    recs = run_jobs(jobs, workers, progress=_stderr_progress(name))
    records.write_csv(outdir / name, recs)
    return recs


def _stderr_progress(name):
    import sys

    def show(done, total):
        print(f"\r{name}: {done}/{total}", end="", file=sys.stderr)
        if done == total:
            print(file=sys.stderr)
    return show


def _rows(recs):
    out = []
    for r in recs:
        seed = r.meta["seed"]
        params = r.meta.get("params", {})
        for t, name, index, value in r.rows:
            d = {"seed": seed, "t": t, "observable": name, "index": index,
                 "value": value}
            d.update({k: str(v) for k, v in params.items()})
            out.append(d)
    return out


FACTOR_Q0 = {"kind": "factorizable", "r": 3, "q": [0.0, 1 / 3, 1 / 3, 1 / 3],
             "boundary": "periodic"}


def recipe_fig2(budget, outdir, workers, base_seed):
    """Hybrid circuit at n=4: half-cut entropy across the p_x axis, p_z=0."""
    b = {"small": dict(sizes=(32, 64), seeds=24, px=(0.1, 0.3, 0.5, 0.7, 0.9), T=2.0),
         "medium": dict(sizes=(64, 128), seeds=60, px=np.linspace(0.1, 0.9, 9), T=4.0),
         "paper": dict(sizes=(128, 256, 512), seeds=100, px=np.linspace(0.05, 0.95, 13), T=4.0)}[budget]
    jobs = sweep_jobs("hybrid", None, "px", b["px"], b["sizes"], b["seeds"], base_seed,
                      T_of_L=lambda L: b["T"] * L,
                      opts_of=lambda v, L: {"n": 4.0, "p_x": float(v), "p_z": 0.0,
                                            "observables": ("half_cut",)})
    recs = _run_and_write(outdir, "fig2_sweep.csv", jobs, workers)
    rows = _rows(recs)
    report = {}
    for px in b["px"]:
        sam = analysis.seed_window_means(rows, "half_cut", None, "px")
        by_L = {L: sam[(float(px), L)].mean() for L in b["sizes"]
                if (float(px), L) in sam}
        report[f"px={px}"] = {f"L={L}": v for L, v in by_L.items()}
    _report(outdir, "fig2_report.json", {"half_cut_means": report})
    return 0


def recipe_fig3(budget, outdir, workers, base_seed):
    """Ternary phase-diagram data for identity-free ensembles, r=3 and r=2."""
    b = {"small": dict(step=6, sizes=(24, 48), seeds=16, T=3.0),
         "medium": dict(step=10, sizes=(48, 96), seeds=40, T=4.0),
         "paper": dict(step=14, sizes=(96, 192), seeds=100, T=4.0)}[budget]
    n = b["step"]
    qpoints = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            qx, qy = i / n, j / n
            qz = 1.0 - qx - qy
            if max(qx, qy, qz) < 1.0:  # corners are fully commuting: skip
                qpoints.append((round(qx, 6), round(qy, 6), round(qz, 6)))
    for r in (3, 2):
        jobs = []
        point = 0
        for (qx, qy, qz) in qpoints:
            desc = {"kind": "factorizable", "r": r, "q": [0.0, qx, qy, qz],
                    "boundary": "periodic"}
            for L in b["sizes"]:
                params = {"L": L, "T": b["T"] * L, "qx": qx, "qy": qy, "qz": qz}
                for s in range(b["seeds"]):
                    jobs.append(Job(len(jobs), "pure", desc, L, b["T"] * L,
                                    base_seed, point, s, params,
                                    {"observables": ("half_cut",)}))
                point += 1
        _run_and_write(outdir, f"fig3_r{r}.csv", jobs, workers)
    _report(outdir, "fig3_report.json",
            {"qpoints": len(qpoints), "sizes": list(b["sizes"])})
    return 0


FIG4_VALUES = (0.24, 0.255, 0.265, 0.274, 0.283, 0.295, 0.31)


def recipe_fig4(budget, outdir, workers, base_seed):
    """Transition on the q_Z = 0 line of the r=3 ensembles: crossing,
    collapse, and the critical log-entropy coefficient."""
    b = {"small": dict(sizes=(32, 64, 128), seeds=60),
         "medium": dict(sizes=(64, 128, 256), seeds=150),
         "paper": dict(sizes=(64, 128, 256), seeds=300)}[budget]
    base = {"kind": "factorizable", "r": 3, "q": [0.0, 0.274, 0.726, 0.0],
            "boundary": "open"}
    jobs = sweep_jobs("pure", base, "qx", FIG4_VALUES, b["sizes"], b["seeds"],
                      base_seed, opts_of=lambda v, L: {"observables": ("i3",)})
    recs = _run_and_write(outdir, "fig4_sweep.csv", jobs, workers)
    rows = _rows(recs)
    table = analysis.SweepTable.from_rows(rows, "i3", "qx")
    crossing = analysis.crossing_finder(table)
    collapse = analysis.collapse_fit(table, qc_range=(0.25, 0.30), nu_range=(0.6, 2.0))
    # profile run at the estimated critical point, largest size
    Lc = b["sizes"][-1]
    desc = apply_param(base, "qx", crossing.estimate)
    jobs2 = sweep_jobs("pure", desc, None, None, (Lc,), max(40, b["seeds"] // 3),
                       base_seed + 1, opts_of=lambda v, L: {"observables": ("profile",)})
    recs2 = _run_and_write(outdir, "fig4_profile.csv", jobs2, workers)
    idx, mat = analysis.profile_window_means(_rows(recs2), "S_prof")
    logfit = analysis.fit_log_entropy(idx, mat, window=(4, Lc / 4))
    _report(outdir, "fig4_fit.json", {
        "crossing": crossing.to_json_dict(),
        "collapse": collapse.to_json_dict(),
        "log_entropy": logfit.to_json_dict()})
    return 0


def recipe_fig5c(budget, outdir, workers, base_seed):
    """Stabilizer-length tails of balanced two-species ensembles."""
    b = {"small": dict(L=128, seeds=100),
         "medium": dict(L=256, seeds=300),
         "paper": dict(L=512, seeds=1000)}[budget]
    report = {}
    for name, (pa, pb) in {"X_ZZ": ("X", "ZZ"), "X_ZZZ": ("X", "ZZZ")}.items():
        desc = {"kind": "bipartite", "pattern_a": pa, "pattern_b": pb,
                "delta": 0.0, "boundary": "periodic"}
        L = b["L"]
        jobs = sweep_jobs("pure", desc, None, None, (L,), b["seeds"], base_seed,
                          opts_of=lambda v, L: {"observables": ("pofl",)})
        recs = _run_and_write(outdir, f"fig5c_{name}.csv", jobs, workers)
        idx, mat = analysis.profile_window_means(_rows(recs), "pofl")
        mat = mat / np.maximum(mat.sum(axis=1, keepdims=True), 1e-300)
        fit = analysis.fit_power_law(idx, mat, window=(4, L / 4))
        report[name] = fit.to_json_dict()
    _report(outdir, "fig5c_fit.json", report)
    return 0


FIG8_VALUES = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30)


def recipe_fig8(budget, outdir, workers, base_seed):
    """Code distance and rate of the center-X ensembles as Z measurements mix in."""
    b = {"small": dict(sizes=(32, 64), seeds=40),
         "medium": dict(sizes=(64, 128), seeds=100),
         "paper": dict(sizes=(128, 256), seeds=100)}[budget]
    base = {"kind": "lbit", "n_star": 4, "epsilon": 0.0, "p_z": 0.0,
            "boundary": "periodic"}
    jobs = sweep_jobs("purify", base, "pz", FIG8_VALUES, b["sizes"], b["seeds"],
                      base_seed, opts_of=lambda v, L: {
                          "probe_times": [4.0 * L], "distance_times": [4.0 * L]})
    recs = _run_and_write(outdir, "fig8_sweep.csv", jobs, workers)
    rows = _rows(recs)
    table = analysis.SweepTable.from_rows(rows, "cd_mean", "pz")
    # collapse of distance density under the quoted exponent
    dens = analysis.SweepTable(table.param, table.observable, table.values,
                               table.sizes,
                               {k: v / k[1] for k, v in table.samples.items()})
    col = analysis.collapse_fit(dens, qc_range=(0.08, 0.24), nu_range=(1.1, 1.1 + 1e-9),
                                grid=33, refinements=1)
    _report(outdir, "fig8_fit.json", {"pz_c": col.qc, "nu_fixed": 1.1,
                                      "residual": col.residual})
    return 0


def recipe_fig9(budget, outdir, workers, base_seed):
    """Encoded-qubit decay and distance peak of the critical r=2 ensemble."""
    b = {"small": dict(sizes=(32, 64), seeds=60, T=8.0),
         "medium": dict(sizes=(64, 128), seeds=150, T=8.0),
         "paper": dict(sizes=(64, 128, 256), seeds=200, T=8.0)}[budget]
    desc = {"kind": "factorizable", "r": 2, "q": [0.0, 1 / 3, 1 / 3, 1 / 3],
            "boundary": "periodic"}

    def opts(v, L):
        times = np.unique(np.concatenate([
            np.linspace(0.05, 1.0, 20), np.linspace(1.0, b["T"], 29)])) * L
        dist = np.linspace(0.2, 2.0, 10) * L
        return {"probe_times": times, "distance_times": dist}

    jobs = sweep_jobs("purify", desc, None, None, b["sizes"], b["seeds"], base_seed,
                      T_of_L=lambda L: b["T"] * L, opts_of=opts)
    recs = _run_and_write(outdir, "fig9_runs.csv", jobs, workers)
    _report(outdir, "fig9_report.json", {"sizes": list(b["sizes"]), "T": b["T"]})
    return 0


def recipe_fig10(budget, outdir, workers, base_seed):
    """Reference-qubit light cones for ranges 2, 3 and 5."""
    b = {"small": dict(L=63, seeds=60, T=1.0, ranges=(3, 5)),
         "medium": dict(L=127, seeds=100, T=1.5, ranges=(2, 3, 5)),
         "paper": dict(L=255, seeds=200, T=2.0, ranges=(2, 3, 5))}[budget]
    report = {}
    for r in b["ranges"]:
        desc = {"kind": "factorizable", "r": r, "q": [0.0, 1 / 3, 1 / 3, 1 / 3],
                "boundary": "open"}
        L = b["L"]
        jobs = sweep_jobs("reference", desc, None, None, (L,), b["seeds"],
                          base_seed + r, T_of_L=lambda L: b["T"] * L)
        recs = _run_and_write(outdir, f"fig10_r{r}.csv", jobs, workers)
        rows = _rows(recs)
        vb = analysis.wavefront_velocity(rows, L)
        report[f"r={r}"] = vb
    _report(outdir, "fig10_fit.json", report)
    return 0


FIG11_VALUES = (2.96, 2.99, 3.01, 3.02, 3.03, 3.05, 3.08)


def recipe_fig11(budget, outdir, workers, base_seed):
    """Fractional-range transition of the center-X ensembles."""
    b = {"small": dict(sizes=(32, 64, 128), seeds=60),
         "medium": dict(sizes=(64, 128, 256), seeds=150),
         "paper": dict(sizes=(64, 128, 256), seeds=300)}[budget]
    base = {"kind": "lbit", "n_star": 3, "epsilon": 0.0, "p_z": 0.0,
            "boundary": "open"}
    jobs = sweep_jobs("pure", base, "n", FIG11_VALUES, b["sizes"], b["seeds"],
                      base_seed, opts_of=lambda v, L: {"observables": ("i3",)})
    recs = _run_and_write(outdir, "fig11_sweep.csv", jobs, workers)
    rows = _rows(recs)
    table = analysis.SweepTable.from_rows(rows, "i3", "n")
    crossing = analysis.crossing_finder(table)
    collapse = analysis.collapse_fit(table, qc_range=(2.98, 3.06), nu_range=(0.6, 2.0))
    _report(outdir, "fig11_fit.json", {"crossing": crossing.to_json_dict(),
                                       "collapse": collapse.to_json_dict()})
    return 0


RECIPES = {
    "fig2": recipe_fig2,
    "fig3": recipe_fig3,
    "fig4": recipe_fig4,
    "fig5c": recipe_fig5c,
    "fig8": recipe_fig8,
    "fig9": recipe_fig9,
    "fig10": recipe_fig10,
    "fig11": recipe_fig11,
}


def reproduce(figure: str, budget: str, outdir: Path, workers=None, base_seed=1) -> int:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = {"figure": figure, "budget": budget, "base_seed": base_seed}
    records.write_json(outdir / f"{figure}_spec.json", spec)
    return RECIPES[figure](budget, outdir, workers, base_seed)
