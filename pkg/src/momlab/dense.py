"""Brute-force state-vector simulator used as ground truth in tests.

Capped at 10 qubits; correctness over speed throughout.  Pauli strings act
on computational-basis indices by bit arithmetic, so no 2^n x 2^n matrices
are ever built.
"""

from __future__ import annotations

import numpy as np

from .pauli import DimensionError, PauliString
from .tableau import CliffordGate

_MAX_SITES = 10


class ImpossibleOutcomeError(ValueError):
    """Raised when a forced outcome has (numerically) zero probability."""


class DenseState:
    """A normalized pure state on n <= 10 qubits."""

    def __init__(self, n: int, vec: np.ndarray | None = None):
        if not 1 <= n <= _MAX_SITES:
            raise ValueError(f"n must be in [1, {_MAX_SITES}], got {n}")
        self.n = n
        if vec is None:
            vec = np.zeros(2**n, dtype=np.complex128)
            vec[0] = 1.0
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (2**n,):
            raise ValueError("amplitude vector has wrong length")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |v| = {norm}")
        self.vec = vec

    @staticmethod
    def zero_state(n: int) -> "DenseState":
        return DenseState(n)

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.vec.copy())

    # -- Pauli action --------------------------------------------------------

    def _pauli_phases(self, op: PauliString) -> tuple[np.ndarray, np.ndarray]:
        """Return (target indices, phases) of op acting on basis states."""
        idx = np.arange(2**self.n, dtype=np.int64)
        zcount = _bitcounts(idx & op.z)
        phase = np.where(zcount & 1, -1.0, 1.0).astype(np.complex128)
        ycount = (op.x & op.z).bit_count()
        phase *= op.sign * (1j) ** (ycount % 4)
        return idx ^ op.x, phase

    def apply_pauli(self, op: PauliString) -> None:
        if op.n != self.n:
            raise DimensionError("operator/state size mismatch")
        tgt, phase = self._pauli_phases(op)
        out = np.zeros_like(self.vec)
        out[tgt] = phase * self.vec
        self.vec = out

    def expectation(self, op: PauliString) -> float:
        tgt, phase = self._pauli_phases(op)
        return float(np.real(np.vdot(self.vec[tgt], phase * self.vec)))

    # -- measurement ---------------------------------------------------------

    def measure(self, op: PauliString, rng: np.random.Generator | None = None,
                force: int | None = None) -> tuple[int, float]:
        """Measure op; returns (outcome, probability of that outcome).

        With ``force`` = +1/-1 the state is projected onto that outcome and
        its Born probability reported; forcing an outcome of probability
        below 1e-10 raises.
        """
        if op.is_identity:
            raise ValueError("cannot measure the identity string")
        exp = self.expectation(op)
        p_plus = min(max((1.0 + exp) / 2.0, 0.0), 1.0)
        if force is not None:
            s = int(force)
            prob = p_plus if s == 1 else 1.0 - p_plus
            if prob < 1e-10:
                raise ImpossibleOutcomeError(f"outcome {s} has probability {prob}")
        else:
            if rng is None:
                raise ValueError("need an rng when the outcome is not forced")
            s = 1 if rng.random() < p_plus else -1
            prob = p_plus if s == 1 else 1.0 - p_plus
        tgt, phase = self._pauli_phases(op)
        opvec = np.zeros_like(self.vec)
        opvec[tgt] = phase * self.vec
        proj = (self.vec + s * opvec) / 2.0
        self.vec = proj / np.linalg.norm(proj)
        return s, prob

    # -- gates ----------------------------------------------------------------

    def apply_clifford(self, gate: CliffordGate) -> None:
        idx = np.arange(2**self.n, dtype=np.int64)
        if gate.kind == "P":
            i = gate.sites[0]
            self.vec = np.where((idx >> i) & 1, 1j * self.vec, self.vec)
        elif gate.kind == "CZ":
            i, j = gate.sites
            both = ((idx >> i) & 1) & ((idx >> j) & 1)
            self.vec = np.where(both, -self.vec, self.vec)
        elif gate.kind == "H":
            i = gate.sites[0]
            bit = 1 << i
            lo = idx[(idx & bit) == 0]
            a = self.vec[lo].copy()
            b = self.vec[lo | bit].copy()
            s = np.sqrt(0.5)
            self.vec[lo] = s * (a + b)
            self.vec[lo | bit] = s * (a - b)
        else:
            raise ValueError(gate.kind)

    # -- entropy ---------------------------------------------------------------

    def entropy(self, region) -> float:
        """Von Neumann entropy of the reduced state on ``region``, in bits."""
        sites = sorted(int(s) for s in region)
        if any(not 0 <= s < self.n for s in sites):
            raise ValueError("region site out of range")
        rest = [s for s in range(self.n) if s not in sites]
        # axis k of the reshaped tensor corresponds to site n-1-k
        psi = self.vec.reshape([2] * self.n)
        axes_a = [self.n - 1 - s for s in sites]
        axes_b = [self.n - 1 - s for s in rest]
        psi = np.transpose(psi, axes_a + axes_b).reshape(2 ** len(sites), -1)
        sv = np.linalg.svd(psi, compute_uv=False)
        lam = sv**2
        lam = lam[lam > 1e-14]
        return float(-np.sum(lam * np.log2(lam)))


def _bitcounts(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr.astype(np.uint64)).astype(np.int64)
