import numpy as np
import pytest

from momlab import BitMatrix, DimensionError, PauliString, gf2_kernel, gf2_rank
from momlab.pauli import gf2_kernel_masks, gf2_solve, multiply, symplectic_product

from conftest import random_pauli

I2 = np.eye(2)
XM = np.array([[0, 1], [1, 0]], dtype=complex)
YM = np.array([[0, -1j], [1j, 0]])
ZM = np.array([[1, 0], [0, -1]], dtype=complex)
MATS = {"I": I2, "X": XM, "Y": YM, "Z": ZM}


def to_matrix(p):
    m = np.array([[1.0 + 0j]])
    for i in range(p.n):
        m = np.kron(m, MATS[p.letter(i)])
    return p.sign * m


def test_label_roundtrip():
    for label in ["+XZI", "-Y", "+IIII", "-XZIY"]:
        p = PauliString.from_label(label)
        assert p.label() == label
    assert PauliString.from_label("XZ").label() == "+XZ"
    assert PauliString.from_label("−XZ").sign == -1


def test_label_errors():
    with pytest.raises(ValueError):
        PauliString.from_label("XQ")
    with pytest.raises(ValueError):
        PauliString.from_label("+")
    with pytest.raises(ValueError):
        PauliString.from_label("XXX", n=2)


def test_symplectic_product_examples():
    X = PauliString.from_label("X")
    Z = PauliString.from_label("Z")
    assert symplectic_product(X, Z) == 1
    assert symplectic_product(X, X) == 0
    assert symplectic_product(PauliString.from_label("XZ"), PauliString.from_label("ZX")) == 0


def test_symplectic_dimension_error():
    with pytest.raises(DimensionError):
        symplectic_product(PauliString.from_label("X"), PauliString.from_label("XX"))


def test_multiply_examples():
    ZZ = PauliString.from_label("ZZ")
    ZI = PauliString.from_label("ZI")
    assert multiply(ZZ, ZI).label() == "+IZ"
    XX = PauliString.from_label("XX")
    assert multiply(XX, PauliString.from_label("ZZ")).label() == "-YY"


def test_multiply_involution(rng):
    for _ in range(50):
        g = random_pauli(4, rng)
        prod = multiply(g, g)
        assert prod.is_identity and prod.sign == 1


def test_multiply_against_matrix_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        a = random_pauli(n, rng, allow_identity=True)
        b = random_pauli(n, rng, allow_identity=True)
        prod = to_matrix(a) @ to_matrix(b)
        res = to_matrix(multiply(a, b))
        if symplectic_product(a, b) == 0:
            assert np.allclose(prod, res)
        else:
            # anticommuting products carry a dangling factor of i
            assert np.allclose(prod, 1j * res)


def test_sign_exchange_relation(rng):
    for _ in range(200):
        n = int(rng.integers(1, 5))
        a = random_pauli(n, rng)
        b = random_pauli(n, rng)
        ab = multiply(a, b)
        ba = multiply(b, a)
        s = symplectic_product(a, b)
        assert ab.x == ba.x and ab.z == ba.z
        assert ab.sign == ba.sign * (-1) ** s


def test_symplectic_bilinearity(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        a, b, c = (random_pauli(n, rng, allow_identity=True) for _ in range(3))
        lhs = symplectic_product(multiply(a, b), c)
        rhs = symplectic_product(a, c) ^ symplectic_product(b, c)
        assert lhs == rhs


def test_gf2_rank_examples():
    assert gf2_rank(np.eye(3, dtype=int)) == 3
    m = np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1]])
    assert gf2_rank(m) == 2
    ker = gf2_kernel(m)
    assert ker.rows == 1
    assert ker.row_mask(0) == 0b111


def test_gf2_rank_exhaustive_span_oracle(rng):
    # rank from the size of the row span, enumerated over all 2^8 combinations
    for _ in range(20):
        m = rng.integers(0, 2, size=(8, 12))
        masks = [int("".join(map(str, row[::-1])), 2) for row in m]
        span = {0}
        for mask in masks:
            span |= {v ^ mask for v in span}
        assert 2 ** gf2_rank(m) == len(span)


def test_rank_plus_kernel_dimension(rng):
    for _ in range(30):
        rows = int(rng.integers(1, 10))
        cols = int(rng.integers(1, 14))
        m = rng.integers(0, 2, size=(rows, cols))
        bm = BitMatrix.from_dense(m)
        assert bm.rank() + bm.kernel().rows == cols


def test_kernel_vectors_annihilate(rng):
    for _ in range(30):
        m = rng.integers(0, 2, size=(6, 9))
        bm = BitMatrix.from_dense(m)
        ker = bm.kernel()
        for r in range(ker.rows):
            v = ker.row_mask(r)
            for row in range(6):
                assert (bm.row_mask(row) & v).bit_count() % 2 == 0


def test_bitmatrix_roundtrip(rng):
    m = rng.integers(0, 2, size=(5, 70))
    bm = BitMatrix.from_dense(m)
    assert np.array_equal(bm.to_dense(), m.astype(np.uint8))


def test_gf2_solve(rng):
    for _ in range(40):
        rows = [int(x) for x in rng.integers(0, 1 << 10, size=6)]
        combo = int(rng.integers(0, 1 << 6))
        target = 0
        for i in range(6):
            if (combo >> i) & 1:
                target ^= rows[i]
        sol = gf2_solve(rows, 10, target)
        assert sol is not None
        acc = 0
        for i in range(6):
            if (sol >> i) & 1:
                acc ^= rows[i]
        assert acc == target
    assert gf2_solve([0b01, 0b10], 3, 0b100) is None


def test_embed():
    p = PauliString.from_label("XZ")
    assert p.embed(5, 2).label() == "+IIXZI"
    assert p.embed(5, 4, periodic=True).label() == "+ZIIIX"
    with pytest.raises(ValueError):
        p.embed(5, 4)
