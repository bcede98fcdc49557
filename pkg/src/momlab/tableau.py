"""Stabilizer tableau with projective Pauli measurement and Clifford gates.

A state on ``n`` sites is a list of ``g <= n`` independent, commuting signed
Pauli generators; ``g == n`` is a pure state and ``n - g`` is the entropy in
bits.  For mixed states the tableau also carries ``n - g`` symplectic pairs
of "logical" rows spanning a complement of the generator span inside its
centralizer.  A measured operator that commutes with every generator is a
new generator exactly when it anticommutes with some logical row, which
makes the dependent/independent split cheap precisely in the regimes where
it is needed often.

Measurement follows the textbook case split: anticommuting generators are
pairwise gauge-fixed by the first one, which is then replaced by the
measured operator with a random sign; commuting independent operators are
appended; commuting dependent operators leave the state unchanged with an
outcome recovered by a GF(2) solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from .pauli import (
    DimensionError,
    PauliString,
    gf2_kernel_masks,
    mask_to_words,
    words_per_block,
    words_to_mask,
    _rref_int_rows,
)


class InvalidMeasurementError(ValueError):
    """Raised when asked to measure the identity string."""


class GaugeError(ValueError):
    """Raised when a gauge operation needs a pure state but got a mixed one."""


@dataclass(frozen=True)
class CliffordGate:
    """One of CZ(i, j), P(i), H(i)."""

    kind: str
    sites: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("CZ", "P", "H"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "CZ" else 1
        if len(self.sites) != want:
            raise ValueError(f"{self.kind} takes {want} site(s)")
        if self.kind == "CZ" and self.sites[0] == self.sites[1]:
            raise ValueError("CZ sites must be distinct")


@dataclass(frozen=True)
class MeasurementResult:
    value: int | None  # +1 or -1; None when the caller skipped sign recovery
    deterministic: bool


def _sites_to_mask(n: int, region: Iterable[int] | np.ndarray) -> int:
    if isinstance(region, np.ndarray) and region.dtype == bool:
        idx = np.nonzero(region)[0]
    else:
        idx = list(region)
    mask = 0
    for s in idx:
        s = int(s)
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range for n={n}")
        mask |= 1 << s
    return mask


class StabilizerTableau:
    """A (possibly mixed) stabilizer state on ``n`` qubits."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one site")
        self.n = n
        self.W = words_per_block(n)
        W = self.W
        self.gen = np.zeros((n, 2 * W), dtype=np.uint64)
        self.sgn = np.zeros(n, dtype=np.uint8)
        self.glo = np.zeros(n, dtype=np.int64)
        self.ghi = np.zeros(n, dtype=np.int64)
        self.g = 0
        self.logw = np.zeros((2 * n, 2 * W), dtype=np.uint64)
        self.llo = np.zeros(2 * n, dtype=np.int64)
        self.lhi = np.zeros(2 * n, dtype=np.int64)
        self.nlog = 0
        self._opbuf = np.zeros(2 * W, dtype=np.uint64)
        self._idxbuf = np.zeros(2 * n + n, dtype=np.int64)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero_state(n: int) -> "StabilizerTableau":
        """The +Z product state |0...0>."""
        t = StabilizerTableau(n)
        for i in range(n):
            w = i >> 6
            t.gen[i, t.W + w] = np.uint64(1) << np.uint64(i & 63)
            t.glo[i] = w
            t.ghi[i] = w + 1
        t.g = n
        return t

    @staticmethod
    def maximally_mixed(n: int) -> "StabilizerTableau":
        """The fully mixed state: no generators, all logical pairs (X_i, Z_i)."""
        t = StabilizerTableau(n)
        one = np.uint64(1)
        for i in range(n):
            w = i >> 6
            bit = one << np.uint64(i & 63)
            t.logw[2 * i, w] = bit
            t.logw[2 * i + 1, t.W + w] = bit
            t.llo[2 * i] = w
            t.lhi[2 * i] = w + 1
            t.llo[2 * i + 1] = w
            t.lhi[2 * i + 1] = w + 1
        t.nlog = 2 * n
        return t

    @staticmethod
    def from_generators(gens: Sequence[PauliString], n: int | None = None) -> "StabilizerTableau":
        """Build a state from independent commuting generators (any g <= n)."""
        if not gens:
            if n is None:
                raise ValueError("need n for an empty generator list")
            return StabilizerTableau.maximally_mixed(n)
        if n is None:
            n = gens[0].n
        for p in gens:
            if p.n != n:
                raise DimensionError("generator length mismatch")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if not gens[i].commutes_with(gens[j]):
                    raise ValueError(f"generators {i} and {j} anticommute")
        masks = [p.x | (p.z << n) for p in gens]
        _, pivots = _rref_int_rows(masks, 2 * n)
        if len(pivots) != len(gens):
            raise ValueError("generators are GF(2)-dependent")
        t = StabilizerTableau(n)
        for i, p in enumerate(gens):
            xw, zw = p.to_words()
            t.gen[i, : t.W] = xw
            t.gen[i, t.W :] = zw
            t.sgn[i] = 0 if p.sign == 1 else 1
            t.glo[i], t.ghi[i] = _word_range(t.gen[i], t.W)
        t.g = len(gens)
        if t.g < n:
            _complete_logicals(t, masks)
        return t

    # -- basic queries -----------------------------------------------------

    @property
    def is_pure(self) -> bool:
        return self.g == self.n

    @property
    def entropy(self) -> int:
        """Total entropy in bits: n minus the number of generators."""
        return self.n - self.g

    def generators(self) -> list[PauliString]:
        out = []
        for i in range(self.g):
            x = words_to_mask(self.gen[i, : self.W])
            z = words_to_mask(self.gen[i, self.W :])
            out.append(PauliString(self.n, x, z, -1 if self.sgn[i] else 1))
        return out

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau(self.n)
        t.gen[:] = self.gen
        t.sgn[:] = self.sgn
        t.glo[:] = self.glo
        t.ghi[:] = self.ghi
        t.g = self.g
        t.logw[:] = self.logw
        t.llo[:] = self.llo
        t.lhi[:] = self.lhi
        t.nlog = self.nlog
        return t

    # -- measurement -------------------------------------------------------

    def measure(self, op: PauliString, rng: np.random.Generator,
                want_value: bool = True) -> MeasurementResult:
        """Projectively measure ``op``; the state is updated in place.

        One random bit is drawn from ``rng`` per call; it is unused when the
        outcome turns out to be deterministic.
        """
        if op.n != self.n:
            raise DimensionError(f"operator has {op.n} sites, state has {self.n}")
        if op.is_identity:
            raise InvalidMeasurementError("cannot measure the identity string")
        opbuf = self._opbuf
        opbuf[: self.W] = mask_to_words(op.x, self.n)
        opbuf[self.W :] = mask_to_words(op.z, self.n)
        owl, owh = _word_range(opbuf, self.W)
        opsign = 0 if op.sign == 1 else 1
        rand_bit = int(rng.integers(0, 2))
        case, self.g, self.nlog, _ = K.measure_op(
            self.gen, self.sgn, self.glo, self.ghi, self.g,
            self.logw, self.llo, self.lhi, self.nlog, self.W,
            opbuf, owl, owh, opsign, rand_bit, self._idxbuf)
        if case == K.CASE_DETERMINISTIC:
            value = None
            if want_value:
                in_span, sbit = K.membership_sign(self.gen, self.sgn, self.g,
                                                  self.W, opbuf, np.uint8(opsign))
                if not in_span:
                    raise AssertionError("commuting op outside span with no logical content")
                value = -1 if sbit else 1
            opbuf[:] = 0
            return MeasurementResult(value, True)
        opbuf[:] = 0
        return MeasurementResult(-1 if rand_bit else 1, False)

    # -- Clifford gates ----------------------------------------------------

    def apply_clifford(self, gate: CliffordGate) -> None:
        for s in gate.sites:
            if not 0 <= s < self.n:
                raise ValueError(f"site {s} out of range")
        W = self.W
        one = np.uint64(1)
        if gate.kind in ("P", "H"):
            i = gate.sites[0]
            w = i >> 6
            bit = one << np.uint64(i & 63)
            for words, signs, count in ((self.gen, self.sgn, self.g),
                                        (self.logw, None, self.nlog)):
                xv = words[:count, w] & bit
                zv = words[:count, W + w] & bit
                if signs is not None:
                    signs[:count] ^= ((xv != 0) & (zv != 0)).astype(np.uint8)
                if gate.kind == "P":
                    words[:count, W + w] ^= xv
                else:
                    flip = xv ^ zv
                    words[:count, w] ^= flip
                    words[:count, W + w] ^= flip
        else:
            i, j = gate.sites
            pairs = np.array([[i, j]], dtype=np.int64)
            empty = np.empty(0, dtype=np.int64)
            K.lbit_layer(self.gen, self.sgn, self.glo, self.ghi, self.g,
                         W, self.n, empty, pairs, False)
            if self.nlog:
                dummy_sgn = np.zeros(self.nlog, dtype=np.uint8)
                K.lbit_layer(self.logw, dummy_sgn, self.llo, self.lhi, self.nlog,
                             W, self.n, empty, pairs, False)

    # -- entropies ---------------------------------------------------------

    def subsystem_entropy(self, region: Iterable[int] | np.ndarray) -> int:
        """Von Neumann entropy (bits) of the reduced state on ``region``."""
        mask = _sites_to_mask(self.n, region)
        size = mask.bit_count()
        comp = ((1 << self.n) - 1) ^ mask
        mw = self._column_mask(comp)
        r = K.rank_masked(self.gen, self.g, 2 * self.W, mw)
        return size - self.g + int(r)

    def _column_mask(self, site_mask: int) -> np.ndarray:
        mw = np.zeros(2 * self.W, dtype=np.uint64)
        words = mask_to_words(site_mask, self.n)
        mw[: self.W] = words
        mw[self.W :] = words
        return mw

    def prefix_entropies(self) -> np.ndarray:
        """S([0, l)) for every l in 0..n, from one elimination sweep."""
        n = self.n
        order = np.empty(2 * n, dtype=np.int64)
        for k, s in enumerate(range(n - 1, -1, -1)):
            order[2 * k] = 2 * s
            order[2 * k + 1] = 2 * s + 1
        checkpoints = np.arange(0, 2 * n + 1, 2, dtype=np.int64)
        ranks = np.empty(checkpoints.shape[0], dtype=np.int64)
        K.rank_profile(self.gen, self.g, self.W, order, checkpoints, ranks)
        # checkpoint k adjoined the last k sites; prefix length l = n - k
        ells = n - np.arange(n + 1)
        out = np.empty(n + 1, dtype=np.int64)
        out[ells] = ells - self.g + ranks
        return out

    def region_entropies_nested(self, orderings: np.ndarray,
                                checkpoints: np.ndarray,
                                region_sizes: np.ndarray) -> np.ndarray:
        """Entropies of a nested family whose complements are prefixes of
        ``orderings`` (symplectic column ids); vectorized over checkpoints."""
        ranks = np.empty(checkpoints.shape[0], dtype=np.int64)
        K.rank_profile(self.gen, self.g, self.W, orderings, checkpoints, ranks)
        return region_sizes - self.g + ranks

    # -- clipped gauge -----------------------------------------------------

    def clip(self) -> tuple["StabilizerTableau", np.ndarray, np.ndarray, np.ndarray]:
        """Return (clipped tableau, length histogram, lefts, rights).

        The histogram counts generator lengths 0..n (index = length).  Only
        defined for pure states.
        """
        if not self.is_pure:
            raise GaugeError("clipped gauge needs a pure state")
        t = self.copy()
        left = np.empty(self.g, dtype=np.int64)
        right = np.empty(self.g, dtype=np.int64)
        bad = K.clip_gauge(t.gen, t.sgn, t.g, t.W, t.n, left, right)
        if bad:
            raise AssertionError("clipped-gauge postcondition failed")
        for i in range(t.g):
            t.glo[i] = left[i] >> 6
            t.ghi[i] = (right[i] >> 6) + 1
        lengths = right - left + 1
        hist = np.bincount(lengths, minlength=self.n + 1)
        return t, hist, left, right

    @staticmethod
    def straddling_counts(left: np.ndarray, right: np.ndarray, n: int) -> np.ndarray:
        """Number of generators straddling each of the n-1 internal cuts.

        Cut c separates [0, c) from [c, n); a generator straddles it when
        left < c <= right.
        """
        counts = np.zeros(n + 1, dtype=np.int64)
        for l, r in zip(left, right):
            counts[l + 1] += 1
            counts[r + 1] -= 1
        return np.cumsum(counts)[1:n]

    # -- code metrics ------------------------------------------------------

    def contiguous_code_distance(self, periodic: bool = False) -> tuple[np.ndarray, float, int]:
        """Per-site contiguous distance, its mean, and its minimum.

        Pure states have no logical operators and return zeros by convention.
        """
        lx = np.zeros(self.n, dtype=np.int64)
        if self.is_pure:
            return lx, 0.0, 0
        K.contiguous_distance(self.gen, self.g, self.W, self.n, periodic, lx)
        return lx, float(lx.mean()), int(lx.min())

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        return "\n".join(p.label() for p in self.generators()) + "\n"

    @staticmethod
    def from_text(text: str, n: int | None = None) -> "StabilizerTableau":
        gens = [PauliString.from_label(line) for line in text.splitlines() if line.strip()]
        return StabilizerTableau.from_generators(gens, n=n)

    # -- invariant checks (used by tests) -----------------------------------

    def validate(self) -> None:
        gens = self.generators()
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                assert gens[i].commutes_with(gens[j]), (i, j)
        masks = [p.x | (p.z << self.n) for p in gens]
        _, pivots = _rref_int_rows(list(masks), 2 * self.n)
        assert len(pivots) == self.g
        assert self.nlog == 2 * (self.n - self.g)
        logs = []
        for t in range(self.nlog):
            x = words_to_mask(self.logw[t, : self.W])
            z = words_to_mask(self.logw[t, self.W :])
            logs.append((x, z))
        for x, z in logs:
            for p in gens:
                assert ((x & p.z) ^ (z & p.x)).bit_count() & 1 == 0
        _, pivots = _rref_int_rows(masks + [x | (z << self.n) for x, z in logs], 2 * self.n)
        assert len(pivots) == self.g + self.nlog, "logicals dependent on generators"


def _word_range(row: np.ndarray, W: int) -> tuple[int, int]:
    lo, hi = W, 0
    for w in range(W):
        if row[w] or row[W + w]:
            lo = min(lo, w)
            hi = max(hi, w + 1)
    if hi == 0:
        return 0, 0
    return lo, hi


def _symp(u: tuple[int, int], v: tuple[int, int]) -> int:
    return ((u[0] & v[1]) ^ (u[1] & v[0])).bit_count() & 1


def _complete_logicals(t: StabilizerTableau, gen_masks: list[int]) -> None:
    """Fill t.logw with symplectic pairs spanning a complement of the
    generator span inside its centralizer."""
    n = t.n
    rows = [((m & ((1 << n) - 1)) << n) | (m >> n) for m in gen_masks]  # swapped halves
    kern = gf2_kernel_masks(rows, 2 * n)
    # keep kernel vectors independent modulo the generators
    red, pivots = _rref_int_rows(list(gen_masks), 2 * n)
    reps = []
    basis = red[: len(pivots)]
    piv = list(pivots)
    for v in kern:
        w = v
        for row, c in zip(basis, piv):
            if (w >> c) & 1:
                w ^= row
        if w:
            basis = basis + [w]
            # find leading bit
            c = (w & -w).bit_length() - 1
            piv.append(c)
            # re-reduce basis to keep pivots unique
            for k in range(len(basis) - 1):
                if (basis[k] >> c) & 1:
                    basis[k] ^= w
            reps.append(w)
    pairs: list[tuple[int, int]] = []
    pool = [(v & ((1 << n) - 1), v >> n) for v in reps]
    while pool:
        a = pool.pop(0)
        hit = None
        for idx, b in enumerate(pool):
            if _symp(a, b):
                hit = idx
                break
        assert hit is not None, "centralizer pairing failed"
        b = pool.pop(hit)
        rest = []
        for u in pool:
            if _symp(u, b):
                u = (u[0] ^ a[0], u[1] ^ a[1])
            if _symp(u, a):
                u = (u[0] ^ b[0], u[1] ^ b[1])
            rest.append(u)
        pool = rest
        pairs.append((a[0] | (a[1] << n), b[0] | (b[1] << n)))
    for j, (va, vb) in enumerate(pairs):
        for k, v in ((2 * j, va), (2 * j + 1, vb)):
            x = v & ((1 << n) - 1)
            z = v >> n
            t.logw[k, : t.W] = mask_to_words(x, n)
            t.logw[k, t.W :] = mask_to_words(z, n)
            t.llo[k], t.lhi[k] = _word_range(t.logw[k], t.W)
    t.nlog = 2 * len(pairs)
    assert t.nlog == 2 * (n - t.g)
