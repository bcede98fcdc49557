"""Command-line harness: single runs, sweeps, graph analyses, fits, recipes.

Outputs are a versioned CSV of observable rows plus a JSON sidecar holding
the fully resolved run specification; reruns with the same spec produce
byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, records, recipes
from .ensembles import EnsembleError, GeometryError, load_custom
from .frustration import (
    averaged_frustration,
    build_tensor,
    connected_components,
    find_symmetries,
    graph_for_ensemble,
    is_bipartite,
)
from .sweep import Job, ensemble_from_descriptor, run_jobs


def _ensemble_descriptor(args) -> dict:
    kind = args.ensemble
    if kind == "factorizable":
        qx, qy, qz = args.qx, args.qy, args.qz
        qi = args.qi if args.qi is not None else max(0.0, 1.0 - qx - qy - qz)
        return {"kind": "factorizable", "r": args.r, "q": [qi, qx, qy, qz],
                "boundary": args.boundary}
    if kind == "lbit":
        return {"kind": "lbit", "n_star": int(np.floor(args.n + 1e-12)),
                "epsilon": args.n - int(np.floor(args.n + 1e-12)),
                "p_z": args.pz, "boundary": args.boundary}
    if kind == "bipartite":
        return {"kind": "bipartite", "pattern_a": args.pattern_a,
                "pattern_b": args.pattern_b, "delta": args.delta,
                "boundary": args.boundary}
    if kind == "custom":
        ens = load_custom(args.file, args.boundary)
        return {"kind": "custom", "species": [s.label() for s in ens.species],
                "probs": [float(p) for p in ens.probs], "boundary": args.boundary}
    raise ValueError(f"unknown ensemble {kind!r}")


def _parse_values(spec: str) -> list[float]:
    if ":" in spec:
        lo, hi, num = spec.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(num))]
    return [float(v) for v in spec.split(",")]


def _point_descriptor(base: dict, param: str | None, value: float | None, args) -> tuple[dict, dict]:
    """Apply a sweep parameter to the ensemble/protocol descriptor."""
    d = dict(base)
    opts = {}
    if param is None:
        return d, opts
    if param == "qx":
        qz = d["q"][3]
        d["q"] = [0.0, value, 1.0 - value - qz, qz]
    elif param == "delta":
        d["delta"] = value
    elif param == "n":
        d["n_star"] = int(np.floor(value + 1e-12))
        d["epsilon"] = value - d["n_star"]
    elif param == "pz":
        if args.protocol == "hybrid":
            opts["p_z"] = value
        else:
            d["p_z"] = value
    elif param == "px":
        opts["p_x"] = value
    else:
        raise ValueError(f"unknown sweep parameter {param!r}")
    return d, opts


def _build_jobs(args, param=None, values=None):
    base = _ensemble_descriptor(args) if args.protocol != "hybrid" else None
    jobs = []
    point_index = 0
    values = values if values is not None else [None]
    sizes = [int(v) for v in args.L.split(",")]
    for value in values:
        for L in sizes:
            T = args.T if args.T is not None else 4.0 * L
            desc, extra = (None, {}) if base is None else (base, {})
            if base is not None:
                desc, extra = _point_descriptor(base, param, value, args)
            opts = dict(extra)
            params = {"L": L, "T": T}
            if value is not None:
                params[param] = value
            if args.protocol == "pure":
                opts["observables"] = tuple(args.observables.split(","))
            elif args.protocol == "hybrid":
                opts.setdefault("n", args.n)
                opts.setdefault("p_x", args.px)
                opts.setdefault("p_z", args.pz)
                opts["observables"] = tuple(args.observables.split(","))
                opts["periodic"] = args.boundary == "periodic"
                params.update(n=opts["n"], px=opts["p_x"], pz=opts["p_z"])
            elif args.protocol == "purify" and args.distance_times:
                opts["distance_times"] = _parse_values(args.distance_times)
            for s in range(args.seeds):
                jobs.append(Job(len(jobs), args.protocol, desc, L, T,
                                args.base_seed, point_index, s, params, opts))
            point_index += 1
    return jobs


def _write_outputs(args, jobs, recs, extra_spec=None):
    out = Path(args.out)
    records.write_csv(out, recs)
    spec = {"version": __version__, "argv_spec": _spec_dict(args),
            "n_jobs": len(jobs)}
    if extra_spec:
        spec.update(extra_spec)
    records.write_json(out.with_suffix(".json"), spec)
    print(f"wrote {out} ({len(recs)} trajectories)")


def _spec_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())
            if k != "func" and v is not None}


def cmd_run(args) -> int:
    jobs = _build_jobs(args)
    recs = run_jobs(jobs, args.workers, progress=_progress(args))
    _write_outputs(args, jobs, recs)
    return 0


def cmd_sweep(args) -> int:
    values = _parse_values(args.values)
    jobs = _build_jobs(args, args.param, values)
    recs = run_jobs(jobs, args.workers, progress=_progress(args))
    _write_outputs(args, jobs, recs, {"param": args.param, "values": values})
    return 0


def _progress(args):
    if getattr(args, "quiet", False):
        return None

    def show(done, total):
        print(f"\r  {done}/{total} trajectories", end="", file=sys.stderr)
        if done == total:
            print(file=sys.stderr)
    return show


def cmd_frustration(args) -> int:
    if args.file:
        ens = load_custom(args.file, args.boundary)
    else:
        ens = ensemble_from_descriptor(_ensemble_descriptor(args))
    out = {}
    L = args.window or max(4 * ens.r, 24)
    if args.check in ("bipartite", "all"):
        res = is_bipartite(graph_for_ensemble(ens, L))
        out["bipartite"] = res.to_json_dict()
    if args.check in ("components", "all"):
        comps = connected_components(graph_for_ensemble(ens, L))
        out["components"] = {"count": len(comps),
                             "sizes": sorted(len(c.vertices) for c in comps)}
    if args.check in ("symmetries", "all"):
        syms = find_symmetries(ens, L)
        out["symmetries"] = {"count": len(syms),
                             "operators": [s.label() for s in syms]}
    if args.check in ("tensor", "all"):
        t = build_tensor(ens)
        out["tensor"] = {"r": t.r, "n_species": t.n_species,
                         "gamma": t.gamma.reshape(t.n_species, -1).tolist()}
    if args.check in ("averaged", "all"):
        vals, errs = averaged_frustration(ens)
        out["averaged"] = {"displacements": list(range(-(ens.r - 1), ens.r)),
                           "values": vals.tolist(), "stderr": errs.tolist()}
    if args.graph_out:
        Path(args.graph_out).write_text(graph_for_ensemble(ens, L).to_edge_list_text())
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_collapse(args) -> int:
    rows = records.read_csv(args.csv)
    window = tuple(_parse_values(args.window)) if args.window else None
    out = {}
    if args.fit in ("crossing", "both"):
        table = analysis.SweepTable.from_rows(rows, args.observable, args.param, window)
        res = analysis.crossing_finder(table, n_boot=args.n_boot)
        out["crossing"] = res.to_json_dict()
    if args.fit in ("collapse", "both"):
        table = analysis.SweepTable.from_rows(rows, args.observable, args.param, window)
        qc_range = tuple(_parse_values(args.qc_range)) if args.qc_range else None
        res = analysis.collapse_fit(table, qc_range=qc_range)
        out["collapse"] = res.to_json_dict()
    if args.fit == "logS":
        idx, mat = analysis.profile_window_means(rows, "S_prof", window)
        res = analysis.fit_log_entropy(idx, mat)
        out["logS"] = res.to_json_dict()
    if args.fit == "pofl":
        idx, mat = analysis.profile_window_means(rows, "pofl", window)
        mat = mat / np.maximum(mat.sum(axis=1, keepdims=True), 1e-300)
        res = analysis.fit_power_law(idx, mat)
        out["pofl"] = res.to_json_dict()
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_reproduce(args) -> int:
    return recipes.reproduce(args.figure, args.budget, Path(args.out),
                             workers=args.workers, base_seed=args.base_seed)


def _add_ensemble_flags(p):
    p.add_argument("--ensemble", choices=["factorizable", "lbit", "bipartite", "custom"],
                   default="factorizable")
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--qx", type=float, default=1 / 3)
    p.add_argument("--qy", type=float, default=1 / 3)
    p.add_argument("--qz", type=float, default=1 / 3)
    p.add_argument("--qi", type=float, default=None)
    p.add_argument("--n", type=float, default=4.0, help="center-X tail range n*+eps")
    p.add_argument("--pz", type=float, default=0.0)
    p.add_argument("--px", type=float, default=0.0)
    p.add_argument("--pattern-a", default="X")
    p.add_argument("--pattern-b", default="ZZ")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--file", default=None, help="custom ensemble file")
    p.add_argument("--boundary", choices=["periodic", "open"], default="periodic")


def _add_run_flags(p):
    p.add_argument("--protocol", choices=["pure", "purify", "reference", "hybrid"],
                   default="pure")
    p.add_argument("--L", default="64", help="comma-separated system sizes")
    p.add_argument("--T", type=float, default=None, help="run time (default 4L)")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--base-seed", type=int, default=1)
    p.add_argument("--observables", default="half_cut",
                   help="comma list: half_cut,i3,profile,pofl")
    p.add_argument("--distance-times", default=None,
                   help="code-distance probe times (purify protocol)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", required=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="momlab",
        description="measurement-only stabilizer dynamics laboratory")
    parser.add_argument("--version", action="version", version=f"momlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one parameter point")
    _add_ensemble_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter over a grid")
    _add_ensemble_flags(p)
    _add_run_flags(p)
    p.add_argument("--param", required=True, choices=["qx", "delta", "n", "pz", "px"])
    p.add_argument("--values", required=True, help="comma list or lo:hi:num")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("frustration", help="graph and tensor analyses")
    _add_ensemble_flags(p)
    p.add_argument("--check", choices=["bipartite", "components", "symmetries",
                                       "tensor", "averaged", "all"], default="all")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--graph-out", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_frustration)

    p = sub.add_parser("collapse", help="crossing / collapse / tail fits on a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--observable", default="i3")
    p.add_argument("--param", default="qx")
    p.add_argument("--fit", choices=["crossing", "collapse", "both", "logS", "pofl"],
                   default="both")
    p.add_argument("--window", default=None, help="time window t_lo,t_hi")
    p.add_argument("--qc-range", default=None)
    p.add_argument("--n-boot", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_collapse)

    p = sub.add_parser("reproduce", help="canned parameter studies")
    p.add_argument("figure", choices=sorted(recipes.RECIPES))
    p.add_argument("--budget", choices=["small", "medium", "paper"], default="small")
    p.add_argument("--out", default="reproduce-out")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--base-seed", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EnsembleError, GeometryError, analysis.NoCrossingError,
            analysis.FitRangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
