import numpy as np
import pytest

from momlab import (
    CliffordGate,
    DenseState,
    GaugeError,
    InvalidMeasurementError,
    PauliString,
    StabilizerTableau,
)
from momlab.pauli import gf2_solve

from conftest import random_pauli, random_stab_state, random_state_pair


def P(label):
    return PauliString.from_label(label)


# -- measurement case examples ------------------------------------------------


def test_deterministic_unchanged(rng):
    t = StabilizerTableau.zero_state(2)
    before = t.to_text()
    r = t.measure(P("ZI"), rng)
    assert r.deterministic and r.value == 1
    assert t.to_text() == before


def test_mixed_single_x_adds_generator(rng):
    t = StabilizerTableau.maximally_mixed(4)
    r = t.measure(P("XIII"), rng)
    assert not r.deterministic and r.value in (1, -1)
    assert t.g == 1 and t.entropy == 3


def test_bell_pair_creation(rng):
    t = StabilizerTableau.zero_state(2)
    r = t.measure(P("XX"), rng)
    assert not r.deterministic
    labels = {g.label() for g in t.generators()}
    want = "+XX" if r.value == 1 else "-XX"
    assert want in labels and "+ZZ" in labels
    assert t.subsystem_entropy([0]) == 1


def test_measure_identity_rejected(rng):
    t = StabilizerTableau.zero_state(2)
    with pytest.raises(InvalidMeasurementError):
        t.measure(P("II"), rng)


def test_measure_twice_idempotent(rng):
    for _ in range(30):
        n = int(rng.integers(2, 9))
        t = random_stab_state(n, rng)
        op = random_pauli(n, rng)
        r1 = t.measure(op, rng)
        snapshot = t.to_text()
        r2 = t.measure(op, rng)
        assert r2.deterministic and r2.value == r1.value
        assert t.to_text() == snapshot


def test_generator_count_monotone(rng):
    t = StabilizerTableau.maximally_mixed(6)
    g = 0
    for _ in range(200):
        op = random_pauli(6, rng)
        t.measure(op, rng)
        assert t.g in (g, g + 1)
        g = t.g
        t.validate()
    assert t.g == 6  # global random strings purify eventually


# -- oracle equivalence --------------------------------------------------------


def test_measure_matches_dense_oracle(rng):
    for _ in range(150):
        n = int(rng.integers(1, 7))
        t, d = random_state_pair(n, rng)
        op = random_pauli(n, rng)
        r = t.measure(op, rng)
        out, prob = d.measure(op, force=r.value)
        assert out == r.value
        if r.deterministic:
            assert prob == pytest.approx(1.0, abs=1e-8)
        else:
            assert prob == pytest.approx(0.5, abs=1e-8)
        # post-measurement states agree: every generator stabilizes the dense state
        for gen in t.generators():
            assert d.expectation(gen) == pytest.approx(1.0, abs=1e-8)


def test_subsystem_entropy_matches_dense(rng):
    for _ in range(6):
        n = 6
        t, d = random_state_pair(n, rng)
        for mask in range(1, 2**n - 1):
            region = [s for s in range(n) if (mask >> s) & 1]
            assert t.subsystem_entropy(region) == pytest.approx(
                d.entropy(region), abs=1e-8)


# -- Clifford conjugation --------------------------------------------------------


def test_cz_conjugation(rng):
    t = StabilizerTableau.from_generators([P("XI")])
    t.apply_clifford(CliffordGate("CZ", (0, 1)))
    assert t.generators()[0].label() == "+XZ"


def test_p_conjugation():
    t = StabilizerTableau.from_generators([P("X")])
    t.apply_clifford(CliffordGate("P", (0,)))
    assert t.generators()[0].label() == "+Y"
    t.apply_clifford(CliffordGate("P", (0,)))
    assert t.generators()[0].label() == "-X"


def test_h_conjugation():
    t = StabilizerTableau.from_generators([P("Z")])
    t.apply_clifford(CliffordGate("H", (0,)))
    assert t.generators()[0].label() == "+X"


def test_clifford_matches_dense(rng):
    for _ in range(40):
        n = int(rng.integers(1, 6))
        t, d = random_state_pair(n, rng, layers=8)
        for gen in t.generators():
            assert d.expectation(gen) == pytest.approx(1.0, abs=1e-8)


# -- entropies -------------------------------------------------------------------


def test_entropy_examples():
    bell = StabilizerTableau.from_generators([P("XX"), P("ZZ")])
    assert bell.subsystem_entropy([0]) == 1
    prod = StabilizerTableau.zero_state(5)
    assert prod.subsystem_entropy([1, 3]) == 0
    ghz = StabilizerTableau.from_generators(
        [P("XXXX"), P("ZZII"), P("IZZI"), P("IIZZ")])
    assert ghz.subsystem_entropy([0, 1]) == 1


def test_entropy_complement_symmetry(rng):
    for _ in range(20):
        n = 12
        t = random_stab_state(n, rng)
        mask = int(rng.integers(1, 2**n - 1))
        region = [s for s in range(n) if (mask >> s) & 1]
        comp = [s for s in range(n) if not (mask >> s) & 1]
        assert t.subsystem_entropy(region) == t.subsystem_entropy(comp)


def test_prefix_entropies_match_subsystem(rng):
    t = random_stab_state(20, rng)
    pref = t.prefix_entropies()
    for ell in range(21):
        assert pref[ell] == t.subsystem_entropy(range(ell))


# -- clipped gauge ------------------------------------------------------------------


def test_clip_z_product():
    t = StabilizerTableau.zero_state(6)
    clipped, hist, left, right = t.clip()
    assert hist[1] == 6 and hist[2:].sum() == 0


def test_clip_bell_chain():
    gens = []
    for k in range(0, 8, 2):
        gens.append(P("I" * k + "XX" + "I" * (6 - k)))
        gens.append(P("I" * k + "ZZ" + "I" * (6 - k)))
    t = StabilizerTableau.from_generators(gens)
    _, hist, _, _ = t.clip()
    assert hist[2] == 8


def test_clip_requires_pure():
    t = StabilizerTableau.maximally_mixed(4)
    with pytest.raises(GaugeError):
        t.clip()


def test_clip_straddling_equals_entropy(rng):
    for _ in range(25):
        n = int(rng.integers(4, 40))
        t = random_stab_state(n, rng)
        clipped, hist, left, right = t.clip()
        straddle = StabilizerTableau.straddling_counts(left, right, n)
        pref = t.prefix_entropies()
        assert np.array_equal(2 * pref[1:n], straddle)
        # the clipped tableau generates the same state
        cpref = clipped.prefix_entropies()
        assert np.array_equal(pref, cpref)


def test_clip_preserves_group(rng):
    n = 10
    t = random_stab_state(n, rng)
    clipped, _, _, _ = t.clip()
    rows = [p.x | (p.z << n) for p in t.generators()]
    for q in clipped.generators():
        assert gf2_solve(rows, 2 * n, q.x | (q.z << n)) is not None


# -- contiguous code distance ----------------------------------------------------


def brute_contiguous_distance(t, periodic):
    """Enumerate all Pauli strings on every window; exponential oracle."""
    n = t.n
    gens = t.generators()
    gen_rows = [p.x | (p.z << n) for p in gens]
    logical_windows = set()

    def window_sites(s, length):
        return [(s + k) % n for k in range(length)]

    admits = {}
    for s in range(n):
        for length in range(1, n + 1):
            if not periodic and s + length > n:
                continue
            sites = window_sites(s, length)
            smask = 0
            for q in sites:
                smask |= 1 << q
            found = False
            for xm in range(1 << length):
                for zm in range(1 << length):
                    if xm == 0 and zm == 0:
                        continue
                    x = z = 0
                    for k, q in enumerate(sites):
                        x |= ((xm >> k) & 1) << q
                        z |= ((zm >> k) & 1) << q
                    if any(((x & p.z) ^ (z & p.x)).bit_count() & 1 for p in gens):
                        continue
                    if gf2_solve(gen_rows, 2 * n, x | (z << n)) is None:
                        found = True
                        break
                if found:
                    break
            admits[(s, length)] = found
    lx = []
    for site in range(n):
        best = n + 1
        for (s, length), ok in admits.items():
            if not ok:
                continue
            sites = window_sites(s, length)
            if site in sites:
                best = min(best, length)
        lx.append(best if best <= n else 0)
    return np.array(lx)


def test_code_distance_mixed_trivial():
    t = StabilizerTableau.maximally_mixed(5)
    lx, mean, mn = t.contiguous_code_distance()
    assert np.all(lx == 1) and mean == 1.0 and mn == 1


def test_code_distance_pure_zero(rng):
    t = random_stab_state(6, rng)
    lx, mean, mn = t.contiguous_code_distance()
    assert np.all(lx == 0) and mean == 0.0


def test_code_distance_repetition_dressing():
    t = StabilizerTableau.from_generators([P("ZZI"), P("IZZ")])
    lx, _, _ = t.contiguous_code_distance()
    assert lx[0] == 1


@pytest.mark.parametrize("periodic", [False, True])
def test_code_distance_matches_bruteforce(rng, periodic):
    for trial in range(12):
        n = int(rng.integers(3, 7))
        t = StabilizerTableau.maximally_mixed(n)
        target_g = int(rng.integers(1, n))
        guard = 0
        while t.g < target_g and guard < 200:
            t.measure(random_pauli(n, rng), rng)
            guard += 1
        if t.is_pure:
            continue
        lx, _, _ = t.contiguous_code_distance(periodic=periodic)
        expect = brute_contiguous_distance(t, periodic)
        assert np.array_equal(lx, expect), (trial, t.to_text())


def test_admitting_window_monotone(rng):
    # if a window admits a logical, so does every contiguous superset
    for _ in range(10):
        n = 6
        t = StabilizerTableau.maximally_mixed(n)
        for _ in range(int(rng.integers(1, 5))):
            t.measure(random_pauli(n, rng), rng)
        if t.is_pure:
            continue
        admit = brute_contiguous_distance(t, False)
        del admit  # the helper already enumerates windows; do it directly here
        gens = t.generators()
        gen_rows = [p.x | (p.z << n) for p in gens]

        def window_admits(s, e):
            sizeA = e - s + 1
            from momlab.pauli import BitMatrix

            maskA = sum(1 << q for q in range(s, e + 1))
            # count independent commuting strings in window vs stabilizer content
            # reuse the engine criterion via entropic ranks
            rows = [((p.x & maskA) | ((p.z & maskA) << n)) for p in gens]
            _, pivA = __import__("momlab.pauli", fromlist=["x"])._rref_int_rows(rows, 2 * n)
            maskB = ((1 << n) - 1) ^ maskA
            rowsB = [((p.x & maskB) | ((p.z & maskB) << n)) for p in gens]
            _, pivB = __import__("momlab.pauli", fromlist=["x"])._rref_int_rows(rowsB, 2 * n)
            return 2 * sizeA - len(pivA) > t.g - len(pivB)

        for s in range(n):
            for e in range(s, n):
                if window_admits(s, e):
                    if e + 1 < n:
                        assert window_admits(s, e + 1)
                    if s > 0:
                        assert window_admits(s - 1, e)


# -- serialization ---------------------------------------------------------------


def test_text_roundtrip(rng):
    t = random_stab_state(9, rng)
    text = t.to_text()
    t2 = StabilizerTableau.from_text(text)
    assert t2.to_text() == text


def test_text_roundtrip_mixed(rng):
    t = StabilizerTableau.maximally_mixed(5)
    for _ in range(3):
        t.measure(random_pauli(5, rng), rng)
    text = t.to_text()
    t2 = StabilizerTableau.from_text(text, n=5)
    assert t2.to_text() == text
    t2.validate()
