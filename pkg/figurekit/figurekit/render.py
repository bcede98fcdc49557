"""Renderers for the standard figure kinds.

All output goes through one savefig path with a pinned style so rendering
is reproducible byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .jobs import FigureJob, SchemaError, read_rows, require_params

STYLE = {
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 130,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 4.5,
    "svg.hashsalt": "momlab",
}

_SIZE_COLORS = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377"]


def _save(fig, output):
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata=_clean_metadata(out.suffix))
    plt.close(fig)


def _clean_metadata(suffix):
    if suffix == ".png":
        return {"Software": None}
    if suffix == ".svg":
        return {"Date": None}
    return None


def _group_param_curves(rows, observable, param):
    """mean +- stderr of an observable vs param value, per system size."""
    acc = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        key = (int(float(r["L"])), float(r[param]))
        acc.setdefault(key, {}).setdefault(r["seed"], []).append(r["value"])
    curves = {}
    for (L, v), per_seed in sorted(acc.items()):
        means = np.array([np.mean(x) for x in per_seed.values()])
        c = curves.setdefault(L, {"x": [], "y": [], "e": []})
        c["x"].append(v)
        c["y"].append(means.mean())
        c["e"].append(means.std(ddof=1) / np.sqrt(len(means)) if len(means) > 1 else 0.0)
    return curves


def _maybe_fit(options, key):
    fit_path = options.get("fit")
    if not fit_path:
        return None
    d = json.loads(Path(fit_path).read_text())
    return d.get(key, d if key in ("",) else None) or d.get(key)


def render_crossing(job: FigureJob):
    rows, keys = read_rows(job.inputs[0])
    param = job.options.get("param", "qx")
    observable = job.options.get("observable", "i3")
    require_params(job.inputs[0], keys, ["L", param])
    curves = _group_param_curves(rows, observable, param)
    if not curves:
        raise SchemaError(f"{job.inputs[0]}: no rows for observable {observable!r}")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k, (L, c) in enumerate(sorted(curves.items())):
            ax.errorbar(c["x"], c["y"], yerr=c["e"], marker="o",
                        color=_SIZE_COLORS[k % len(_SIZE_COLORS)], label=f"L={L}")
        ax.set_xlabel(param)
        ax.set_ylabel(observable)
        ax.legend()
        qc = None
        fit = _maybe_fit(job.options, "crossing")
        if fit:
            qc = fit.get("estimate")
        if qc is not None:
            ax.axvline(qc, color="k", ls="--", lw=0.8)
            # inset zoom around the crossing
            axin = ax.inset_axes([0.58, 0.58, 0.38, 0.38])
            for k, (L, c) in enumerate(sorted(curves.items())):
                axin.errorbar(c["x"], c["y"], yerr=c["e"], marker="o", ms=3,
                              color=_SIZE_COLORS[k % len(_SIZE_COLORS)])
            span = (max(c["x"]) - min(c["x"])) / 4 if curves else 0.01
            axin.set_xlim(qc - span, qc + span)
            ys = [y for c in curves.values() for x, y in zip(c["x"], c["y"])
                  if abs(x - qc) <= span]
            if ys:
                pad = (max(ys) - min(ys)) * 0.3 + 1e-3
                axin.set_ylim(min(ys) - pad, max(ys) + pad)
            axin.axvline(qc, color="k", ls="--", lw=0.8)
        _save(fig, job.output)


def render_collapse(job: FigureJob):
    rows, keys = read_rows(job.inputs[0])
    param = job.options.get("param", "qx")
    observable = job.options.get("observable", "i3")
    require_params(job.inputs[0], keys, ["L", param])
    fit = _maybe_fit(job.options, "collapse") or {}
    qc = float(job.options.get("qc", fit.get("qc", 0.0)))
    nu = float(job.options.get("nu", fit.get("nu", 1.0)))
    curves = _group_param_curves(rows, observable, param)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k, (L, c) in enumerate(sorted(curves.items())):
            u = (np.array(c["x"]) - qc) * L ** (1.0 / nu)
            ax.errorbar(u, c["y"], yerr=c["e"], marker="o", ls="none",
                        color=_SIZE_COLORS[k % len(_SIZE_COLORS)], label=f"L={L}")
        ax.set_xlabel(f"({param} - {qc:.4g}) L^(1/{nu:.3g})")
        ax.set_ylabel(observable)
        ax.legend()
        _save(fig, job.output)


def render_loglog_pofl(job: FigureJob):
    rows, _ = read_rows(job.inputs[0])
    acc = {}
    for r in rows:
        if r["observable"] != "pofl":
            continue
        acc[r["index"]] = acc.get(r["index"], 0.0) + r["value"]
    if not acc:
        raise SchemaError(f"{job.inputs[0]}: no 'pofl' rows")
    ell = np.array(sorted(acc))
    counts = np.array([acc[k] for k in ell], dtype=float)
    p = counts / counts.sum()
    pos = p > 0
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(ell[pos], p[pos], "o", color=_SIZE_COLORS[0], label="P(l)")
        # guide line fitted on the interior window
        lo = float(job.options.get("fit_lo", 4))
        hi = float(job.options.get("fit_hi", ell.max() / 4))
        win = pos & (ell >= lo) & (ell <= hi)
        if win.sum() >= 2:
            slope, b = np.polyfit(np.log(ell[win]), np.log(p[win]), 1)
            xs = np.array([lo, hi])
            ax.loglog(xs, np.exp(b) * xs**slope, "k--",
                      label=f"slope {slope:.2f}")
        ax.set_xlabel("stabilizer length l")
        ax.set_ylabel("P(l)")
        ax.legend()
        _save(fig, job.output)


def render_lightcone(job: FigureJob):
    rows, _ = read_rows(job.inputs[0])
    want = job.options.get("observable", "f")
    grids = {}
    norm = {}
    for r in rows:
        if r["observable"] == want:
            grids.setdefault(r["t"], {}).setdefault(r["index"], []).append(r["value"])
        elif r["observable"] == "fnorm":
            norm.setdefault(r["t"], {}).setdefault(r["index"], []).append(r["value"])
    if not grids:
        raise SchemaError(f"{job.inputs[0]}: no {want!r} rows")
    ts = np.array(sorted(grids))
    xs = np.array(sorted({x for d in grids.values() for x in d}))
    img = np.full((ts.size, xs.size), np.nan)
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            if x in grids[t]:
                img[i, j] = np.mean(grids[t][x])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        mesh = ax.pcolormesh(xs, ts, img, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=want)
        # normalized-front contour, dashed
        level = float(job.options.get("level", 0.5))
        front_t, front_x = [], []
        for t in sorted(norm):
            prof = sorted((x, np.mean(v)) for x, v in norm[t].items())
            px = np.array([p[0] for p in prof], float)
            pv = np.array([p[1] for p in prof], float)
            above = np.nonzero(pv >= level)[0]
            if above.size == 0 or above[0] == 0:
                continue
            j = above[0]
            xf = np.interp(level, [pv[j - 1], pv[j]], [px[j - 1], px[j]])
            front_t.append(t)
            front_x.append(xf)
        if front_t:
            ax.plot(front_x, front_t, "w--", lw=1.2)
        ax.set_xlabel("half-width x")
        ax.set_ylabel("time t")
        _save(fig, job.output)


def render_ternary(job: FigureJob):
    rows, keys = read_rows(job.inputs[0])
    require_params(job.inputs[0], keys, ["qx", "qy", "qz", "L"])
    observable = job.options.get("observable", "half_cut")
    acc = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        key = (float(r["qx"]), float(r["qy"]), float(r["qz"]))
        acc.setdefault(key, {}).setdefault(int(float(r["L"])), []).append(r["value"])
    if not acc:
        raise SchemaError(f"{job.inputs[0]}: no {observable!r} rows")
    pts, colors = [], []
    for (qx, qy, qz), by_L in sorted(acc.items()):
        sizes = sorted(by_L)
        s_small = np.mean(by_L[sizes[0]])
        s_large = np.mean(by_L[sizes[-1]])
        ratio = s_large / max(s_small, 1e-9)
        # barycentric embedding of the simplex
        x = qy + qz / 2.0
        y = qz * np.sqrt(3) / 2.0
        pts.append((x, y))
        colors.append(_classify(ratio, s_large, sizes[-1]))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.4, 5.0))
        palette = {"volume": "#d62728", "critical": "#ff9f1c", "area": "#1f77b4"}
        for phase in ("volume", "critical", "area"):
            sel = [p for p, c in zip(pts, colors) if c == phase]
            if sel:
                ax.scatter([p[0] for p in sel], [p[1] for p in sel],
                           c=palette[phase], label=phase, s=36)
        tri = np.array([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2], [0, 0]])
        ax.plot(tri[:, 0], tri[:, 1], "k-", lw=1)
        for lab, (x, y) in {"X": (0, 0), "Y": (1, 0), "Z": (0.5, np.sqrt(3) / 2)}.items():
            ax.annotate(lab, (x, y), textcoords="offset points", xytext=(0, 6),
                        ha="center")
        ax.set_aspect("equal")
        ax.axis("off")
        ax.legend(loc="upper left")
        _save(fig, job.output)


def _classify(ratio, s_large, L_large):
    if ratio >= 1.6 and s_large > 3:
        return "volume"
    if ratio >= 1.15 and s_large > 1.5:
        return "critical"
    return "area"


def render_code_metrics(job: FigureJob):
    rows, keys = read_rows(job.inputs[0])
    require_params(job.inputs[0], keys, ["L"])
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.8))
        for ax, obs, label in ((axes[0], "k", "encoded qubits k"),
                               (axes[1], "cd_mean", "contiguous distance")):
            acc = {}
            for r in rows:
                if r["observable"] != obs:
                    continue
                L = int(float(r["L"]))
                acc.setdefault(L, {}).setdefault(r["t"], []).append(r["value"])
            for k, (L, by_t) in enumerate(sorted(acc.items())):
                ts = np.array(sorted(by_t))
                ys = np.array([np.mean(by_t[t]) for t in ts])
                ax.plot(ts / L, ys, "-o", ms=3,
                        color=_SIZE_COLORS[k % len(_SIZE_COLORS)], label=f"L={L}")
            ax.set_xlabel("t / L")
            ax.set_ylabel(label)
            if acc:
                ax.legend()
        fig.tight_layout()
        _save(fig, job.output)


KINDS = {
    "crossing": render_crossing,
    "collapse": render_collapse,
    "loglog-Pofl": render_loglog_pofl,
    "lightcone-heatmap": render_lightcone,
    "ternary-phase-diagram": render_ternary,
    "code-metrics": render_code_metrics,
}


def render(job: FigureJob):
    if job.kind not in KINDS:
        raise ValueError(f"unknown figure kind {job.kind!r}; have {sorted(KINDS)}")
    for p in job.inputs:
        if not Path(p).exists():
            raise FileNotFoundError(p)
    KINDS[job.kind](job)
    return Path(job.output)
