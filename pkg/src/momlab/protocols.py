"""Experiment drivers: steady states, purification, reference qubit, I3.

Time is measured in sweeps: one unit of time is L measurements.  Each driver
consumes a single ``numpy.random.Generator`` and is bit-reproducible from
(seed, arguments, code version).  Observables are recorded as
(t, name, index, value) rows; profile-like observables use the index column
(cut position, stabilizer length, region half-width), scalars use -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .ensembles import GeometryError, MeasurementEnsemble, hybrid_lbit_step
from .pauli import PauliString
from .tableau import StabilizerTableau


@dataclass
class TrajectoryRecord:
    meta: dict
    rows: list = field(default_factory=list)

    def add(self, t: float, name: str, value: float, index: int = -1) -> None:
        v = float(value)
        if not np.isfinite(v):
            raise ValueError(f"non-finite observable {name} at t={t}")
        if self.rows and t < self.rows[-1][0] - 1e-12:
            raise ValueError("probe times must be nondecreasing")
        self.rows.append((float(t), name, int(index), v))


def default_probe_times(T: float, n_points: int = 17,
                        window: tuple[float, float] | None = None) -> np.ndarray:
    """Evenly spaced probe times; default window is the second half of the run."""
    if window is None:
        window = (T / 2.0, T)
    lo, hi = window
    return np.linspace(lo, hi, n_points)


def _drain(state: StabilizerTableau, ens: MeasurementEnsemble, L: int,
           species, positions, outbits, m0: int, m1: int, periodic: bool) -> None:
    sp_x, sp_z, sp_r, _ = ens.kernel_tables()
    state.g, state.nlog = K.measure_block(
        state.gen, state.sgn, state.glo, state.ghi, state.g,
        state.logw, state.llo, state.lhi, state.nlog, state.W, L, periodic,
        sp_x, sp_z, sp_r, species, positions, outbits, m0, m1,
        state._opbuf, state._idxbuf)


def _predraw(ens: MeasurementEnsemble, L: int, total: int, rng: np.random.Generator):
    species, window_pos = ens.sample_batch(L, total, rng)
    _, _, _, sp_off = ens.kernel_tables()
    positions = window_pos + sp_off[species]
    outbits = rng.integers(0, 2, size=total, dtype=np.uint8).astype(np.uint8)
    return species, positions, outbits


def tripartite_I3(state: StabilizerTableau, partition=None) -> int:
    """Entropy combination over three consecutive quarter blocks.

    I3 = S_A + S_B + S_C + S_ABC - S_AB - S_BC - S_CA with A, B, C the
    first three blocks of an equal four-way split (or an explicit triple of
    site collections).
    """
    L = state.n
    if partition is None:
        if L % 4:
            raise GeometryError(f"L={L} not divisible by 4")
        q = L // 4
        A = list(range(0, q))
        B = list(range(q, 2 * q))
        C = list(range(2 * q, 3 * q))
    else:
        A, B, C = (list(p) for p in partition)
    S = state.subsystem_entropy
    return int(S(A) + S(B) + S(C) + S(A + B + C) - S(A + B) - S(B + C) - S(C + A))


def _probe_marks(probe_times, L: int, total: int) -> np.ndarray:
    t = np.asarray(probe_times, dtype=float)
    marks = np.round(t * L).astype(np.int64)
    if np.any(marks < 0) or np.any(marks > total):
        raise ValueError("probe time outside the run")
    if np.any(np.diff(marks) < 0):
        raise ValueError("probe times must be sorted")
    return marks


def run_pure(ens: MeasurementEnsemble, L: int, T: float, rng: np.random.Generator,
             probe_times=None, observables=("half_cut",), meta=None) -> TrajectoryRecord:
    """Measurement-only evolution from the +Z product state.

    Observables: "half_cut" (S at the middle cut), "profile" (S at every
    cut), "i3" (tripartite combination over quarters), "pofl" (clipped-gauge
    stabilizer length counts).
    """
    periodic = ens.boundary == "periodic"
    total = int(round(T * L))
    if probe_times is None:
        probe_times = default_probe_times(T)
    marks = _probe_marks(probe_times, L, total)
    species, positions, outbits = _predraw(ens, L, total, rng)
    state = StabilizerTableau.zero_state(L)
    rec = TrajectoryRecord(dict(meta or {}, protocol="pure", L=L, T=T,
                                boundary=ens.boundary))
    half_mask = _suffix_mask(state, L // 2)
    m_cur = 0
    for t, m in zip(probe_times, marks):
        _drain(state, ens, L, species, positions, outbits, m_cur, int(m), periodic)
        m_cur = int(m)
        if "half_cut" in observables:
            r = K.rank_masked(state.gen, state.g, 2 * state.W, half_mask)
            rec.add(t, "half_cut", (L // 2) - state.g + int(r))
        if "profile" in observables:
            pref = state.prefix_entropies()
            for ell in range(1, L):
                rec.add(t, "S_prof", pref[ell], index=ell)
        if "i3" in observables:
            rec.add(t, "i3", tripartite_I3(state))
        if "pofl" in observables:
            _, hist, _, _ = state.clip()
            for ell in np.nonzero(hist)[0]:
                rec.add(t, "pofl", int(hist[ell]), index=int(ell))
    return rec


def _suffix_mask(state: StabilizerTableau, cut: int) -> np.ndarray:
    comp = (((1 << state.n) - 1) >> cut) << cut
    return state._column_mask(comp)


def run_purification(ens: MeasurementEnsemble, L: int, T: float,
                     rng: np.random.Generator, probe_times=None,
                     distance_times=None, meta=None) -> TrajectoryRecord:
    """Purification from the fully mixed state.

    Records the number of encoded qubits k = L - g at ``probe_times`` and
    the contiguous code distance (mean and min over sites) at the sparser
    ``distance_times``.
    """
    periodic = ens.boundary == "periodic"
    total = int(round(T * L))
    if probe_times is None:
        probe_times = default_probe_times(T, n_points=33, window=(0.0, T))
    marks = _probe_marks(probe_times, L, total)
    dist_marks = {}
    if distance_times is not None:
        dmarks = _probe_marks(distance_times, L, total)
        dist_marks = {int(m): t for t, m in zip(distance_times, dmarks)}
    species, positions, outbits = _predraw(ens, L, total, rng)
    state = StabilizerTableau.maximally_mixed(L)
    rec = TrajectoryRecord(dict(meta or {}, protocol="purify", L=L, T=T,
                                boundary=ens.boundary))
    m_cur = 0
    for t, m in zip(probe_times, marks):
        _drain(state, ens, L, species, positions, outbits, m_cur, int(m), periodic)
        m_cur = int(m)
        rec.add(t, "k", L - state.g)
        if int(m) in dist_marks:
            _, mean, mn = state.contiguous_code_distance(periodic=periodic)
            rec.add(t, "cd_mean", mean)
            rec.add(t, "cd_min", mn)
    return rec


def run_hybrid(n: float, p_x: float, p_z: float, L: int, T: float,
               rng: np.random.Generator, probe_times=None, periodic=True,
               observables=("half_cut",), meta=None) -> TrajectoryRecord:
    """Layered commuting-gate circuit with single-site X/Z measurements."""
    state = StabilizerTableau.zero_state(L)
    if probe_times is None:
        probe_times = default_probe_times(T)
    marks = np.round(np.asarray(probe_times, dtype=float)).astype(np.int64)
    total = int(round(T))
    rec = TrajectoryRecord(dict(meta or {}, protocol="hybrid", L=L, T=T,
                                boundary="periodic" if periodic else "open"))
    half_mask = _suffix_mask(state, L // 2)
    nxt = 0
    for layer in range(1, total + 1):
        hybrid_lbit_step(state, n, p_x, p_z, rng, periodic=periodic)
        while nxt < len(marks) and marks[nxt] == layer:
            t = float(probe_times[nxt])
            if "half_cut" in observables:
                r = K.rank_masked(state.gen, state.g, 2 * state.W, half_mask)
                rec.add(t, "half_cut", (L // 2) - state.g + int(r))
            if "i3" in observables:
                rec.add(t, "i3", tripartite_I3(state))
            nxt += 1
    return rec


def reference_state(L: int) -> StabilizerTableau:
    """Chain of L (odd) qubits in +Z, center qubit Bell-paired with an
    appended reference qubit at index L."""
    if L % 2 == 0:
        raise GeometryError("reference protocol needs odd L")
    c = L // 2
    n = L + 1
    gens = []
    for i in range(L):
        if i == c:
            continue
        gens.append(PauliString.single(n, i, "Z"))
    x = PauliString.single(n, c, "X") * PauliString.single(n, L, "X")
    z = PauliString.single(n, c, "Z") * PauliString.single(n, L, "Z")
    gens.extend([x, z])
    return StabilizerTableau.from_generators(gens, n=n)


def default_x_grid(half: int, n_points: int = 32) -> np.ndarray:
    lin = np.arange(0, min(5, half + 1))
    if half >= 5:
        geo = np.unique(np.round(np.geomspace(5, half, n_points - lin.size)).astype(int))
        return np.unique(np.concatenate([lin, geo]))
    return lin


def run_reference(ens: MeasurementEnsemble, L: int, T: float,
                  rng: np.random.Generator, probe_times=None, x_grid=None,
                  meta=None) -> TrajectoryRecord:
    """Information spreading from a reference qubit entangled at the center.

    Records S_R, the mutual information f(x) = I(R : [-x, x]) between the
    reference and symmetric regions around the center (index = x; x = 0 is
    the central qubit alone), and the normalized profile f/(2 S_R) where
    S_R > 0.  Measurements act on the system qubits only, with open
    placements.
    """
    if L % 2 == 0:
        raise GeometryError("reference protocol needs odd L")
    half = L // 2
    c = half
    n = L + 1
    total = int(round(T * L))
    if probe_times is None:
        probe_times = np.unique(np.round(np.linspace(0.0, T, 64) * L) / L)
    marks = _probe_marks(probe_times, L, total)
    if x_grid is None:
        x_grid = default_x_grid(half)
    x_grid = np.asarray(x_grid, dtype=int)

    # positions over open placements of the system chain
    npos = L - ens.r + 1
    if npos <= 0:
        raise GeometryError(f"system size {L} below ensemble range {ens.r}")
    sp_x, sp_z, sp_r, sp_off = ens.kernel_tables()
    species = np.searchsorted(ens._cum, rng.random(total), side="right").astype(np.int64)
    np.clip(species, 0, ens.n_species - 1, out=species)
    positions = rng.integers(0, npos, size=total, dtype=np.int64) + sp_off[species]
    outbits = rng.integers(0, 2, size=total, dtype=np.uint8)

    state = reference_state(L)
    rec = TrajectoryRecord(dict(meta or {}, protocol="reference", L=L, T=T,
                                boundary="open"))

    # column orderings whose prefixes are the complements of nested regions
    sites = sorted(range(L), key=lambda s: (-abs(s - c), s))
    dists = np.array([abs(s - c) for s in sites])
    order_a = np.empty(2 * L, dtype=np.int64)
    for k, s in enumerate(sites):
        order_a[2 * k] = 2 * s
        order_a[2 * k + 1] = 2 * s + 1
    order_b = np.empty(2 * L + 2, dtype=np.int64)
    order_b[0] = 2 * L      # reference x column
    order_b[1] = 2 * L + 1  # reference z column
    order_b[2:] = order_a
    # checkpoint for region [-x, x]: complement has (count of dist > x) sites
    counts = np.array([int(np.sum(dists > x)) for x in x_grid])
    chk_a = np.concatenate([2 * counts, [2 * L]]).astype(np.int64)
    ord_idx_a = np.argsort(chk_a, kind="stable")
    chk_b = (2 * counts + 2).astype(np.int64)
    ord_idx_b = np.argsort(chk_b, kind="stable")

    m_cur = 0
    for t, m in zip(probe_times, marks):
        _drain(state, ens, L, species, positions, outbits, m_cur, int(m), False)
        m_cur = int(m)
        ranks_a = np.empty(chk_a.size, dtype=np.int64)
        K.rank_profile(state.gen, state.g, state.W, order_a,
                       chk_a[ord_idx_a], ranks_a)
        ranks_a[ord_idx_a] = ranks_a.copy()
        ranks_b = np.empty(chk_b.size, dtype=np.int64)
        K.rank_profile(state.gen, state.g, state.W, order_b,
                       chk_b[ord_idx_b], ranks_b)
        ranks_b[ord_idx_b] = ranks_b.copy()
        g = state.g
        s_r = 1 - g + int(ranks_a[-1])
        rec.add(t, "S_R", s_r)
        for xi, x in enumerate(x_grid):
            size = 2 * int(x) + 1
            s_ra = (size + 1) - g + int(ranks_a[xi])   # region plus reference
            s_a = size - g + int(ranks_b[xi])          # region alone
            f = s_r + s_a - s_ra
            rec.add(t, "f", f, index=int(x))
            if s_r > 0:
                rec.add(t, "fnorm", f / (2.0 * s_r), index=int(x))
    return rec
