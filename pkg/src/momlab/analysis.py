"""Statistical post-processing: crossings, scaling collapse, tail fits.

Everything operates on the CSV row dicts produced by the runners.  Seeds
are the resampling unit: every uncertainty here is a bootstrap standard
deviation over trajectory seeds unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NoCrossingError(ValueError):
    """The two curves never bracket a sign change on the grid."""


class FitRangeError(ValueError):
    """Empty or degenerate fit window."""


# -- aggregation ---------------------------------------------------------------


def seed_window_means(rows, observable: str, window=None, param: str | None = None):
    """Per-seed time-window means, grouped by (param value, L).

    Returns dict[(value, L)] -> np.ndarray of per-seed means (sorted by seed).
    ``window`` is a (t_lo, t_hi) pair; None keeps all times.
    """
    acc: dict = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        if window is not None and not (window[0] - 1e-9 <= r["t"] <= window[1] + 1e-9):
            continue
        value = float(r[param]) if param else 0.0
        L = int(float(r["L"]))
        key = (value, L)
        acc.setdefault(key, {}).setdefault(r["seed"], []).append(r["value"])
    out = {}
    for key, per_seed in acc.items():
        seeds = sorted(per_seed)
        out[key] = np.array([np.mean(per_seed[s]) for s in seeds])
    return out


def profile_window_means(rows, observable: str, window=None):
    """Per-seed means of an indexed observable: dict[index] -> (seeds array)."""
    acc: dict = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        if window is not None and not (window[0] - 1e-9 <= r["t"] <= window[1] + 1e-9):
            continue
        acc.setdefault(r["index"], {}).setdefault(r["seed"], []).append(r["value"])
    idx = np.array(sorted(acc), dtype=int)
    seeds = sorted({s for d in acc.values() for s in d})
    mat = np.zeros((len(seeds), len(idx)))
    for j, i in enumerate(idx):
        for si, s in enumerate(seeds):
            vals = acc[i].get(s)
            mat[si, j] = np.mean(vals) if vals else 0.0
    return idx, mat


@dataclass
class SweepTable:
    param: str
    observable: str
    values: np.ndarray            # sorted parameter grid
    sizes: list[int]
    samples: dict = field(repr=False)  # (value, L) -> per-seed means

    def curve(self, L: int):
        xs, ys, es, ns = [], [], [], []
        for v in self.values:
            s = self.samples.get((float(v), L))
            if s is None or len(s) == 0:
                continue
            xs.append(v)
            ys.append(s.mean())
            es.append(s.std(ddof=1) / np.sqrt(len(s)) if len(s) > 1 else 0.0)
            ns.append(len(s))
        return np.array(xs), np.array(ys), np.array(es), np.array(ns)

    @staticmethod
    def from_rows(rows, observable: str, param: str, window=None) -> "SweepTable":
        samples = seed_window_means(rows, observable, window, param)
        values = np.array(sorted({v for v, _ in samples}))
        sizes = sorted({L for _, L in samples})
        if len(sizes) < 2:
            raise ValueError("crossing analysis needs at least two system sizes")
        return SweepTable(param, observable, values, sizes, samples)


# -- crossings ---------------------------------------------------------------------


@dataclass
class CrossingResult:
    estimate: float
    stderr: float
    sizes: tuple[int, int]
    n_boot: int

    def to_json_dict(self):
        return {"estimate": self.estimate, "stderr": self.stderr,
                "sizes": list(self.sizes), "n_boot": self.n_boot}


def _interp_crossing(x, d):
    """Sign-change root of d(x) by linear interpolation between brackets.

    The curves coincide on the nonextensive side of the transition, so noise
    can flip the sign of the difference there; the physical crossing is the
    last bracket, the one adjacent to the extensive divergence.
    """
    root = None
    for i in range(len(x) - 1):
        if d[i] == 0:
            root = float(x[i])
        elif d[i] * d[i + 1] < 0:
            frac = d[i] / (d[i] - d[i + 1])
            root = float(x[i] + frac * (x[i + 1] - x[i]))
    if len(d) and d[-1] == 0:
        root = float(x[-1])
    if root is None:
        raise NoCrossingError("curves do not cross on the sampled grid")
    return root


def crossing_finder(table: SweepTable, n_boot: int = 200,
                    rng: np.random.Generator | None = None) -> CrossingResult:
    """Crossing of the two largest sizes' curves, bootstrapped over seeds."""
    if rng is None:
        rng = np.random.default_rng(2024)
    L1, L2 = table.sizes[-2], table.sizes[-1]
    common = [v for v in table.values
              if (float(v), L1) in table.samples and (float(v), L2) in table.samples]
    if len(common) < 4:
        raise ValueError("need at least 4 grid points spanning the crossing")
    x = np.array(common)

    def curve_diff(sampler):
        d = np.empty(len(x))
        for i, v in enumerate(x):
            a = sampler(table.samples[(float(v), L2)])
            b = sampler(table.samples[(float(v), L1)])
            d[i] = a - b
        return d

    est = _interp_crossing(x, curve_diff(lambda s: s.mean()))
    boots = []
    for _ in range(n_boot):
        def resampled(s):
            idx = rng.integers(0, len(s), size=len(s))
            return s[idx].mean()
        try:
            boots.append(_interp_crossing(x, curve_diff(resampled)))
        except NoCrossingError:
            continue
    stderr = float(np.std(boots)) if len(boots) > 1 else float("nan")
    return CrossingResult(est, stderr, (L1, L2), n_boot)


# -- scaling collapse -----------------------------------------------------------------


@dataclass
class CollapseResult:
    qc: float
    nu: float
    residual: float
    qc_grid: np.ndarray
    nu_grid: np.ndarray
    landscape: np.ndarray

    def to_json_dict(self):
        return {"qc": self.qc, "nu": self.nu, "residual": self.residual,
                "qc_grid": self.qc_grid.tolist(), "nu_grid": self.nu_grid.tolist()}


def _collapse_residual(curves, qc, nu):
    """Leave-one-size-out piecewise-linear master-curve residual."""
    scaled = []
    for L, x, y, e in curves:
        u = (x - qc) * L ** (1.0 / nu)
        w = 1.0 / np.maximum(e, 1e-9) ** 2
        scaled.append((u, y, w))
    total = 0.0
    npts = 0
    for i, (u, y, w) in enumerate(scaled):
        ou = np.concatenate([scaled[j][0] for j in range(len(scaled)) if j != i])
        oy = np.concatenate([scaled[j][1] for j in range(len(scaled)) if j != i])
        order = np.argsort(ou)
        ou, oy = ou[order], oy[order]
        inside = (u >= ou[0]) & (u <= ou[-1])
        if not np.any(inside):
            continue
        pred = np.interp(u[inside], ou, oy)
        total += float(np.sum(w[inside] * (y[inside] - pred) ** 2))
        npts += int(np.sum(inside))
    if npts == 0:
        return np.inf
    return total / npts


def collapse_fit(table: SweepTable, qc_range=None, nu_range=(0.5, 2.5),
                 grid: int = 41, refinements: int = 2) -> CollapseResult:
    """Grid-plus-refinement minimization of the master-curve residual."""
    if len(table.sizes) < 3:
        raise ValueError("collapse needs at least 3 system sizes")
    curves = []
    for L in table.sizes:
        x, y, e, _ = table.curve(L)
        curves.append((L, x, y, e))
    if qc_range is None:
        lo, hi = table.values[0], table.values[-1]
        span = hi - lo
        qc_range = (lo + 0.2 * span, hi - 0.2 * span)
    qcs = np.linspace(*qc_range, grid)
    nus = np.linspace(*nu_range, grid)
    best = (np.inf, qcs[0], nus[0])
    land = np.empty((grid, grid))
    for i, qc in enumerate(qcs):
        for j, nu in enumerate(nus):
            res = _collapse_residual(curves, qc, nu)
            land[i, j] = res
            if res < best[0]:
                best = (res, qc, nu)
    first_land, first_qcs, first_nus = land.copy(), qcs.copy(), nus.copy()
    for _ in range(refinements):
        dq = (qcs[-1] - qcs[0]) / 4.0
        dn = (nus[-1] - nus[0]) / 4.0
        qcs = np.linspace(best[1] - dq, best[1] + dq, grid)
        nus = np.linspace(max(best[2] - dn, 0.05), best[2] + dn, grid)
        for qc in qcs:
            for nu in nus:
                res = _collapse_residual(curves, qc, nu)
                if res < best[0]:
                    best = (res, qc, nu)
    if not np.isfinite(best[0]):
        raise FitRangeError("flat or empty collapse objective")
    return CollapseResult(best[1], best[2], best[0], first_qcs, first_nus, first_land)


# -- simple fits -------------------------------------------------------------------


@dataclass
class FitResult:
    estimate: float
    stderr: float
    intercept: float
    window: tuple
    n_boot: int

    def to_json_dict(self):
        return {"estimate": self.estimate, "stderr": self.stderr,
                "intercept": self.intercept, "window": list(self.window),
                "n_boot": self.n_boot}


def _boot_slope(x, mat, n_boot, rng, transform):
    slopes = []
    n_seeds = mat.shape[0]
    for _ in range(n_boot):
        idx = rng.integers(0, n_seeds, size=n_seeds)
        ym = mat[idx].mean(axis=0)
        s = transform(x, ym)
        if s is not None:
            slopes.append(s)
    return float(np.std(slopes)) if len(slopes) > 1 else float("nan")


def fit_log_entropy(ell, per_seed, window=None, n_boot: int = 200,
                    rng: np.random.Generator | None = None) -> FitResult:
    """Least squares of S against ln(l); slope is the log coefficient.

    ``per_seed`` is (n_seeds, n_ell); the window defaults to [4, max/4]
    to skip boundary-dominated cuts.
    """
    if rng is None:
        rng = np.random.default_rng(2024)
    ell = np.asarray(ell, dtype=float)
    per_seed = np.atleast_2d(np.asarray(per_seed, dtype=float))
    if window is None:
        window = (4, ell.max() / 4.0)
    keep = (ell >= window[0]) & (ell <= window[1])
    if keep.sum() < 2:
        raise FitRangeError(f"log-entropy window {window} keeps {keep.sum()} points")
    x = np.log(ell[keep])

    def slope(xv, ym):
        k, c = np.polyfit(xv, ym, 1)
        return k

    mean = per_seed.mean(axis=0)[keep]
    k, c = np.polyfit(x, mean, 1)
    err = _boot_slope(x, per_seed[:, keep], n_boot, rng, slope)
    return FitResult(float(k), err, float(c), tuple(window), n_boot)


def fit_power_law(ell, per_seed, window=None, n_boot: int = 200,
                  rng: np.random.Generator | None = None) -> FitResult:
    """Log-log least squares of a histogram tail: P ~ prefactor * l^exponent."""
    if rng is None:
        rng = np.random.default_rng(2024)
    ell = np.asarray(ell, dtype=float)
    per_seed = np.atleast_2d(np.asarray(per_seed, dtype=float))
    if window is None:
        window = (4, ell.max() / 4.0)
    keep = (ell >= window[0]) & (ell <= window[1])

    def slope(dummy, ym):
        pos = ym > 0
        if pos.sum() < 2:
            return None
        k, _ = np.polyfit(np.log(ell[keep][pos]), np.log(ym[pos]), 1)
        return k

    mean = per_seed.mean(axis=0)[keep]
    pos = mean > 0
    if pos.sum() < 2:
        raise FitRangeError("fewer than 2 populated bins in the fit window")
    k, c = np.polyfit(np.log(ell[keep][pos]), np.log(mean[pos]), 1)
    err = _boot_slope(None, per_seed[:, keep], n_boot, rng, slope)
    return FitResult(float(k), err, float(np.exp(c)), tuple(window), n_boot)


def curve_vs_time(rows, observable: str, L: int | None = None):
    """Seed-averaged time series: returns (t, mean, stderr) arrays."""
    acc: dict = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        if L is not None and int(float(r["L"])) != L:
            continue
        acc.setdefault(r["t"], []).append(r["value"])
    ts = np.array(sorted(acc))
    mean = np.array([np.mean(acc[t]) for t in ts])
    err = np.array([np.std(acc[t], ddof=1) / np.sqrt(len(acc[t]))
                    if len(acc[t]) > 1 else 0.0 for t in ts])
    return ts, mean, err


def wavefront_velocity(rows, L: int, level: float = 0.5,
                       observable: str = "fnorm") -> dict:
    """Ballistic front speed of the reference-qubit information profile.

    For each probe time the front is the first half-width x where the
    seed-averaged normalized profile rises through ``level``; a straight
    line through the ballistic window (front between 2 and a quarter system)
    gives the speed.
    """
    acc: dict = {}
    for r in rows:
        if r["observable"] != observable:
            continue
        acc.setdefault((r["t"], r["index"]), []).append(r["value"])
    ts = sorted({t for t, _ in acc})
    xs = sorted({x for _, x in acc})
    half = L // 2
    fronts = []
    for t in ts:
        prof = [(x, np.mean(acc[(t, x)])) for x in xs if (t, x) in acc]
        if len(prof) < 3:
            continue
        px = np.array([p[0] for p in prof], dtype=float)
        pv = np.array([p[1] for p in prof], dtype=float)
        if pv[0] >= level:  # hole has not opened yet
            fronts.append((t, 0.0))
            continue
        above = np.nonzero(pv >= level)[0]
        if above.size == 0:
            continue
        j = above[0]
        x0, x1 = px[j - 1], px[j]
        v0, v1 = pv[j - 1], pv[j]
        xf = x0 + (level - v0) / (v1 - v0) * (x1 - x0)
        fronts.append((t, float(xf)))
    pts = [(t, xf) for t, xf in fronts if 2.0 <= xf <= half / 2.0 and t > 0]
    if len(pts) < 3:
        return {"v_B": float("nan"), "points": len(pts),
                "fronts": fronts}
    tt = np.array([p[0] for p in pts])
    xx = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(tt, xx, 1)
    return {"v_B": float(slope), "intercept": float(intercept),
            "points": len(pts), "fronts": fronts}


def dilute_k_fit(r_values, qc_values):
    """Constant k in r = k / (2 q_c (1 - q_c)) over measured critical points."""
    r_values = np.asarray(r_values, dtype=float)
    qc = np.asarray(qc_values, dtype=float)
    ks = 2.0 * qc * (1.0 - qc) * r_values
    return float(ks.mean()), float(ks.std(ddof=1) / np.sqrt(len(ks))), ks
