import numpy as np
import pytest

from momlab import DenseState, PauliString
from momlab.dense import ImpossibleOutcomeError

from conftest import random_pauli, random_state_pair


def test_zero_state_measure_z(rng):
    d = DenseState.zero_state(1)
    out, prob = d.measure(PauliString.from_label("Z"), rng)
    assert out == 1 and prob == pytest.approx(1.0)


def test_zero_state_measure_x(rng):
    counts = {1: 0, -1: 0}
    for _ in range(200):
        d = DenseState.zero_state(1)
        out, prob = d.measure(PauliString.from_label("X"), rng)
        assert prob == pytest.approx(0.5)
        counts[out] += 1
    assert counts[1] > 50 and counts[-1] > 50


def test_forced_outcome():
    d = DenseState.zero_state(1)
    out, prob = d.measure(PauliString.from_label("X"), force=-1)
    assert out == -1 and prob == pytest.approx(0.5)
    # state is now |->; forcing +1 on X is impossible
    with pytest.raises(ImpossibleOutcomeError):
        d.measure(PauliString.from_label("X"), force=1)


def test_bell_pair_entropy(rng):
    d = DenseState.zero_state(2)
    d.measure(PauliString.from_label("XX"), rng)
    assert d.entropy([0]) == pytest.approx(1.0, abs=1e-10)
    assert d.entropy([1]) == pytest.approx(1.0, abs=1e-10)


def test_product_state_entropy():
    d = DenseState.zero_state(4)
    for region in ([0], [1, 2], [0, 3]):
        assert d.entropy(region) == pytest.approx(0.0, abs=1e-10)


def test_entropy_complement_symmetry(rng):
    for _ in range(10):
        n = int(rng.integers(2, 7))
        _, d = random_state_pair(n, rng)
        region = [s for s in range(n) if rng.random() < 0.5]
        comp = [s for s in range(n) if s not in region]
        if not region or not comp:
            continue
        assert d.entropy(region) == pytest.approx(d.entropy(comp), abs=1e-8)


def test_pauli_expectation_hermitian(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        _, d = random_state_pair(n, rng)
        p = random_pauli(n, rng)
        e = d.expectation(p)
        assert -1 - 1e-9 <= e <= 1 + 1e-9


def test_measurement_idempotent(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        _, d = random_state_pair(n, rng)
        p = random_pauli(n, rng)
        out, _ = d.measure(p, rng)
        out2, prob2 = d.measure(p, rng)
        assert out2 == out and prob2 == pytest.approx(1.0)
