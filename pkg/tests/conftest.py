import numpy as np
import pytest

from momlab import CliffordGate, DenseState, PauliString, StabilizerTableau

LETTERS = "IXYZ"


def random_pauli(n, rng, allow_identity=False):
    while True:
        label = "".join(rng.choice(list(LETTERS), size=n))
        sign = 1 if rng.random() < 0.5 else -1
        p = PauliString.from_label(("+" if sign == 1 else "-") + label)
        if allow_identity or not p.is_identity:
            return p


def random_gates(n, rng, layers=6):
    gates = []
    for _ in range(layers):
        for i in range(n):
            k = int(rng.integers(0, 3))
            if k == 1:
                gates.append(CliffordGate("H", (i,)))
            elif k == 2:
                gates.append(CliffordGate("P", (i,)))
        perm = rng.permutation(n)
        for a in range(0, n - 1, 2):
            gates.append(CliffordGate("CZ", (int(perm[a]), int(perm[a + 1]))))
    return gates


def random_stab_state(n, rng, layers=8):
    t = StabilizerTableau.zero_state(n)
    for gate in random_gates(n, rng, layers):
        t.apply_clifford(gate)
    return t


def random_state_pair(n, rng, layers=6):
    """The same random Clifford circuit applied to both simulators."""
    t = StabilizerTableau.zero_state(n)
    d = DenseState.zero_state(n)
    for gate in random_gates(n, rng, layers):
        t.apply_clifford(gate)
        d.apply_clifford(gate)
    return t, d


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
