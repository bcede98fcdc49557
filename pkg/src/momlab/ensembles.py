"""Measurement ensembles: species of local Pauli patterns with probabilities.

An ensemble is a list of Pauli patterns living in a length-``r`` window
together with a probability per species and a boundary convention.  The
dynamics draws (species, window position) pairs; each draw is one
measurement and time advances by 1/L.

Builders cover the three structured families used throughout:

* factorizable ensembles: length-r strings with sitewise-independent letter
  distribution q = (q_I, q_X, q_Y, q_Z), the all-identity string excluded;
* X-center ensembles ("l-bit" type): a central X or Y dressed by I/Z tails,
  continued to fractional range by down-weighting the extreme tail slots;
* bipartite ensembles: two species whose intra-species translates commute.

Plain-text ensemble files hold one "PATTERN weight" pair per line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .pauli import PauliString, symplectic_product
from .tableau import StabilizerTableau


class GeometryError(ValueError):
    """Raised when the system is too small for the ensemble range."""


class EnsembleError(ValueError):
    """Raised for invalid ensemble definitions."""


_TOL = 1e-12


@dataclass
class MeasurementEnsemble:
    r: int
    species: list[PauliString]
    probs: np.ndarray
    boundary: str = "periodic"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if len(self.species) != len(self.probs):
            raise EnsembleError("species/probability length mismatch")
        if not self.species:
            raise EnsembleError("empty ensemble")
        if self.boundary not in ("open", "periodic"):
            raise EnsembleError(f"unknown boundary {self.boundary!r}")
        if np.any(self.probs < 0):
            raise EnsembleError("negative probability")
        if abs(self.probs.sum() - 1.0) > _TOL:
            raise EnsembleError(f"probabilities sum to {self.probs.sum()}, not 1")
        for s in self.species:
            if s.is_identity:
                raise EnsembleError("identity string in ensemble")
            if s.n != self.r:
                raise EnsembleError(
                    f"species {s.label()} not expressed in a window of {self.r} sites")
        self._cum = np.cumsum(self.probs)
        self._tables = None

    @property
    def n_species(self) -> int:
        return len(self.species)

    def positions(self, L: int) -> int:
        if L < self.r:
            raise GeometryError(f"system size {L} below ensemble range {self.r}")
        return L if self.boundary == "periodic" else L - self.r + 1

    def sample(self, L: int, rng: np.random.Generator) -> tuple[int, int]:
        """Draw one (species index, window position) pair."""
        npos = self.positions(L)
        a = int(np.searchsorted(self._cum, rng.random(), side="right"))
        a = min(a, self.n_species - 1)
        pos = int(rng.integers(0, npos))
        return a, pos

    def sample_batch(self, L: int, m: int, rng: np.random.Generator):
        """Vectorized draws for m measurements: (species, positions)."""
        npos = self.positions(L)
        a = np.searchsorted(self._cum, rng.random(m), side="right").astype(np.int64)
        np.clip(a, 0, self.n_species - 1, out=a)
        pos = rng.integers(0, npos, size=m, dtype=np.int64)
        return a, pos

    def kernel_tables(self):
        """Per-species trimmed patterns for the packed measurement kernels.

        Returns (sp_x, sp_z, sp_r, sp_off): single-word x/z bits of the
        trimmed pattern, its length, and its offset inside the window.
        """
        if self._tables is None:
            if self.r > 64:
                raise EnsembleError("kernel tables support ranges up to 64 sites")
            A = self.n_species
            sp_x = np.zeros(A, dtype=np.uint64)
            sp_z = np.zeros(A, dtype=np.uint64)
            sp_r = np.zeros(A, dtype=np.int64)
            sp_off = np.zeros(A, dtype=np.int64)
            for a, s in enumerate(self.species):
                sup = s.support()
                off = sup[0]
                sp_off[a] = off
                sp_r[a] = sup[-1] - off + 1
                sp_x[a] = np.uint64(s.x >> off)
                sp_z[a] = np.uint64(s.z >> off)
            self._tables = (sp_x, sp_z, sp_r, sp_off)
        return self._tables

    def describe(self) -> dict:
        d = {"r": self.r, "boundary": self.boundary,
             "species": [s.label() for s in self.species],
             "probs": [float(p) for p in self.probs]}
        d.update(self.meta)
        return d

    def to_text(self) -> str:
        lines = [f"{s.label()} {p!r}" for s, p in zip(self.species, self.probs)]
        return "\n".join(lines) + "\n"


# -- factorizable ensembles ---------------------------------------------------


@dataclass(frozen=True)
class FactorizableSpec:
    r: int
    q: tuple[float, float, float, float]  # (q_I, q_X, q_Y, q_Z)

    def __post_init__(self):
        if self.r < 1:
            raise EnsembleError("range must be at least 1")
        q = np.asarray(self.q, dtype=float)
        if q.shape != (4,) or np.any(q < 0) or abs(q.sum() - 1.0) > _TOL:
            raise EnsembleError(f"q must be a probability 4-vector, got {self.q}")


_Q_CENTER = np.array([1.0, 1.0, 1.0]) / 3.0


def delta_q(q) -> float:
    """Distance of (q_X, q_Y, q_Z) from the equal-weights center."""
    v = np.asarray(q, dtype=float)
    if v.shape == (4,):
        v = v[1:]
    return float(np.linalg.norm(v - _Q_CENTER))


def build_factorizable(spec: FactorizableSpec, boundary: str = "periodic") -> MeasurementEnsemble:
    """All length-r letter strings with nonzero product probability.

    The all-identity string is excluded and the distribution renormalized.
    """
    q = np.asarray(spec.q, dtype=float)
    letters = [k for k in range(4) if q[k] > 0]
    if letters == [0]:
        raise EnsembleError("all weight on the identity letter: empty ensemble")
    names = "IXYZ"
    species: list[PauliString] = []
    probs: list[float] = []
    stack = [("", 1.0)]
    for _ in range(spec.r):
        stack = [(s + names[k], p * q[k]) for s, p in stack for k in letters]
    for s, p in stack:
        if set(s) == {"I"}:
            continue
        species.append(PauliString.from_label(s))
        probs.append(p)
    probs = np.asarray(probs)
    probs = probs / probs.sum()
    meta = {"kind": "factorizable", "q": [float(x) for x in q], "delta_q": delta_q(q)}
    return MeasurementEnsemble(spec.r, species, probs, boundary, meta)


# -- X-center (l-bit style) ensembles -------------------------------------------


@dataclass(frozen=True)
class LBitSpec:
    n_star: int
    epsilon: float = 0.0
    p_z: float = 0.0

    def __post_init__(self):
        if self.n_star < 1:
            raise EnsembleError("n_star must be at least 1")
        if not 0.0 <= self.epsilon < 1.0 + _TOL:
            raise EnsembleError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.p_z <= 1.0:
            raise EnsembleError("p_z must lie in [0, 1]")

    @property
    def n(self) -> float:
        return self.n_star + self.epsilon


def build_lbit(spec: LBitSpec, boundary: str = "periodic") -> MeasurementEnsemble:
    """Central X dressed with I/Z tails out to +-n_star.

    Tail slots at the extreme distance are suppressed by a factor of
    epsilon each; epsilon = 0 removes them, so the species are the
    2^(2 n_star - 1) equally likely strings of length <= 2 n_star - 1.
    A Z on the central slot turns the X into a Y.  With p_z > 0 a
    single-site Z measurement is mixed in with that probability.
    """
    ns, eps = spec.n_star, spec.epsilon
    if eps > 0:
        half = ns
    else:
        half = ns - 1
    r = 2 * half + 1
    center = half
    species: list[PauliString] = []
    weights: list[float] = []
    for alpha in range(1 << r):
        x = 1 << center
        z = 0
        extreme = 0
        for k in range(r):
            if (alpha >> k) & 1:
                z |= 1 << k
                if eps > 0 and (k == 0 or k == r - 1):
                    extreme += 1
        species.append(PauliString(r, x, z))
        weights.append(eps**extreme if eps > 0 else 1.0)
    w = np.asarray(weights)
    w = w / w.sum()
    if spec.p_z > 0:
        species.append(PauliString.single(r, center, "Z"))
        w = np.concatenate([w * (1.0 - spec.p_z), [spec.p_z]])
    meta = {"kind": "lbit", "n_star": ns, "epsilon": eps, "p_z": spec.p_z, "n": spec.n}
    return MeasurementEnsemble(r, species, w, boundary, meta)


# -- bipartite ensembles ----------------------------------------------------------


@dataclass(frozen=True)
class BipartiteSpec:
    pattern_a: str
    pattern_b: str
    delta: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.delta <= 1.0:
            raise EnsembleError("bias must lie in [-1, 1]")


class NotBipartiteBySpeciesError(EnsembleError):
    """A species anticommutes with one of its own translates."""


def _self_commuting(p: PauliString, r: int) -> bool:
    win = 2 * r
    base = p.embed(win, 0)
    for ell in range(1, p.n):
        if symplectic_product(base, p.embed(win, ell)) == 1:
            return False
    return True


def build_bipartite(spec: BipartiteSpec, boundary: str = "periodic") -> MeasurementEnsemble:
    a = PauliString.from_label(spec.pattern_a)
    b = PauliString.from_label(spec.pattern_b)
    r = max(a.n, b.n)
    for name, p in (("A", a), ("B", b)):
        if not _self_commuting(p, r):
            raise NotBipartiteBySpeciesError(
                f"species {name}={p.label()} anticommutes with its own translates")
    pa = (1.0 + spec.delta) / 2.0
    species = [a.embed(r, 0), b.embed(r, 0)]
    probs = np.array([pa, 1.0 - pa])
    keep = probs > 0
    species = [s for s, k in zip(species, keep) if k]
    probs = probs[keep]
    meta = {"kind": "bipartite", "pattern_a": spec.pattern_a,
            "pattern_b": spec.pattern_b, "delta": spec.delta}
    return MeasurementEnsemble(r, species, probs / probs.sum(), boundary, meta)


# -- custom ensembles -----------------------------------------------------------


def parse_custom(text: str, boundary: str = "periodic") -> MeasurementEnsemble:
    """Parse "PATTERN weight" lines; '#' starts a comment; weights need not
    be normalized."""
    species: list[PauliString] = []
    weights: list[float] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EnsembleError(f"line {ln}: expected 'PATTERN weight', got {raw!r}")
        try:
            p = PauliString.from_label(parts[0])
        except ValueError as exc:
            raise EnsembleError(f"line {ln}: {exc}") from exc
        try:
            w = float(parts[1])
        except ValueError:
            raise EnsembleError(f"line {ln}: bad weight {parts[1]!r}") from None
        if w < 0:
            raise EnsembleError(f"line {ln}: negative weight")
        if p.is_identity:
            raise EnsembleError(f"line {ln}: identity string not measurable")
        species.append(p)
        weights.append(w)
    if not species:
        raise EnsembleError("no species in custom ensemble")
    r = max(p.n for p in species)
    species = [p.embed(r, 0) if p.n < r else p for p in species]
    w = np.asarray(weights)
    if w.sum() <= 0:
        raise EnsembleError("weights sum to zero")
    return MeasurementEnsemble(r, species, w / w.sum(), boundary,
                               {"kind": "custom"})


def load_custom(path, boundary: str = "periodic") -> MeasurementEnsemble:
    with open(path) as fh:
        return parse_custom(fh.read(), boundary)


def from_species(patterns: Sequence[str], weights: Sequence[float] | None = None,
                 boundary: str = "periodic") -> MeasurementEnsemble:
    """Convenience builder from pattern labels with optional weights."""
    if weights is None:
        weights = [1.0] * len(patterns)
    text = "\n".join(f"{p} {w}" for p, w in zip(patterns, weights))
    return parse_custom(text, boundary)


# -- hybrid unitary-projective circuit --------------------------------------------


def hybrid_lbit_step(state: StabilizerTableau, n: float, p_x: float, p_z: float,
                     rng: np.random.Generator, periodic: bool = True) -> None:
    """One layer of the commuting-gate circuit plus single-site measurements.

    Gates: each phase gate with probability 1/2; each CZ on sites (i, i+d)
    with probability 1/2 for d < floor(n), (n - floor(n))/2 at d = floor(n),
    zero beyond.  Then every site is measured in X with probability p_x, in
    Z with probability p_z, or left alone.
    """
    if p_x + p_z > 1.0 + _TOL:
        raise ValueError(f"p_x + p_z = {p_x + p_z} exceeds 1")
    L = state.n
    n_star = int(np.floor(n))
    eps = n - n_star
    p_sites = np.nonzero(rng.random(L) < 0.5)[0].astype(np.int64)
    pairs = []
    for d in range(1, n_star + 1):
        prob = 0.5 if d < n_star else eps / 2.0
        if prob <= 0:
            continue
        hi = L if periodic else L - d
        hits = np.nonzero(rng.random(hi) < prob)[0]
        for i in hits:
            pairs.append((int(i), int((i + d) % L)))
    cz = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    K.lbit_layer(state.gen, state.sgn, state.glo, state.ghi, state.g,
                 state.W, L, p_sites, cz, periodic)
    if state.nlog:
        dummy = np.zeros(state.nlog, dtype=np.uint8)
        K.lbit_layer(state.logw, dummy, state.llo, state.lhi, state.nlog,
                     state.W, L, p_sites, cz, periodic)
    draws = rng.random(L)
    meas_sites = np.nonzero(draws < p_x + p_z)[0]
    if meas_sites.size == 0:
        return
    species = (draws[meas_sites] >= p_x).astype(np.int64)  # 0 = X, 1 = Z
    outbits = rng.integers(0, 2, size=meas_sites.size).astype(np.uint8)
    sp_x = np.array([1, 0], dtype=np.uint64)
    sp_z = np.array([0, 1], dtype=np.uint64)
    sp_r = np.array([1, 1], dtype=np.int64)
    state.g, state.nlog = K.measure_block(
        state.gen, state.sgn, state.glo, state.ghi, state.g,
        state.logw, state.llo, state.lhi, state.nlog, state.W, L, periodic,
        sp_x, sp_z, sp_r, species, meas_sites.astype(np.int64), outbits,
        0, meas_sites.size, state._opbuf, state._idxbuf)
