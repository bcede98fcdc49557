"""Signed Pauli strings as binary symplectic vectors, plus dense GF(2) helpers.

Site ``i`` of an ``n``-site string carries I, X, Z or Y according to the bit
pair ``(x_i, z_i)`` = (0,0), (1,0), (0,1), (1,1).  Bit vectors are stored as
arbitrary-width Python integers (bit ``i`` = site ``i``), which keeps the
small-operator algebra exact and allocation-free; conversion helpers produce
the packed ``uint64`` words used by the simulation kernels.

Text form: one letter per site, leftmost letter = site 0, with an optional
leading sign, e.g. ``-XZI``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


class DimensionError(ValueError):
    """Raised when two operands act on different numbers of sites."""


@dataclass(frozen=True)
class PauliString:
    """An n-site Pauli string with sign in {+1, -1}.

    ``x`` and ``z`` are bit masks over sites; bit i of ``x`` (``z``) is the
    X (Z) component on site i.
    """

    n: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one site, got n={self.n}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("x/z bits extend past the last site")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n: int) -> "PauliString":
        return PauliString(n)

    @staticmethod
    def from_label(label: str, n: int | None = None) -> "PauliString":
        """Parse a text label like ``-XZI`` or ``+Y``.

        Accepts ASCII ``-`` as well as the unicode minus sign.
        """
        s = label.strip()
        sign = 1
        if s and s[0] in "+-−":
            if s[0] != "+":
                sign = -1
            s = s[1:]
        if not s:
            raise ValueError(f"empty Pauli label {label!r}")
        x = z = 0
        for i, ch in enumerate(s.upper()):
            if ch not in _BITS:
                raise ValueError(f"bad Pauli letter {ch!r} in {label!r}")
            xb, zb = _BITS[ch]
            x |= xb << i
            z |= zb << i
        if n is None:
            n = len(s)
        elif n < len(s):
            raise ValueError(f"label {label!r} longer than n={n}")
        return PauliString(n, x, z, sign)

    @staticmethod
    def single(n: int, site: int, letter: str, sign: int = 1) -> "PauliString":
        xb, zb = _BITS[letter.upper()]
        if not 0 <= site < n:
            raise ValueError(f"site {site} out of range for n={n}")
        return PauliString(n, xb << site, zb << site, sign)

    # -- inspection --------------------------------------------------------

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(i for i in range(self.n) if (m >> i) & 1)

    def letter(self, site: int) -> str:
        return _LETTERS[(self.x >> site) & 1, (self.z >> site) & 1]

    def label(self) -> str:
        body = "".join(self.letter(i) for i in range(self.n))
        return ("+" if self.sign == 1 else "-") + body

    def __str__(self) -> str:
        return self.label()

    # -- algebra -----------------------------------------------------------

    def commutes_with(self, other: "PauliString") -> bool:
        return symplectic_product(self, other) == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def embed(self, n: int, offset: int, periodic: bool = False) -> "PauliString":
        """Place this pattern into an ``n``-site register starting at ``offset``.

        With ``periodic`` the support wraps around; otherwise it must fit.
        """
        x = z = 0
        for i in range(self.n):
            xb = (self.x >> i) & 1
            zb = (self.z >> i) & 1
            if not (xb or zb):
                continue
            site = offset + i
            if periodic:
                site %= n
            elif site >= n:
                raise ValueError(f"pattern at offset {offset} spills past n={n}")
            x |= xb << site
            z |= zb << site
        return PauliString(n, x, z, self.sign)

    def to_words(self) -> tuple[np.ndarray, np.ndarray]:
        """Packed uint64 words for the x and z bit vectors."""
        return mask_to_words(self.x, self.n), mask_to_words(self.z, self.n)


def symplectic_product(a: PauliString, b: PauliString) -> int:
    """Scalar commutator: 0 if the strings commute, 1 if they anticommute."""
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() & 1


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a * b`` with the phase projected onto {+1, -1}.

    The exponent of ``i`` is accumulated over sitewise products left to
    right; powers 0/1 project to +1 and powers 2/3 to -1.  For commuting
    Hermitian inputs the result is exactly the operator product; for
    anticommuting inputs the leftover factor of ``i`` is dropped under this
    fixed orientation convention.
    """
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")
    x = a.x ^ b.x
    z = a.z ^ b.z
    # i-exponent: sum over sites of (xa za) + (xb zb) + 2 (za xb) - (xc zc)
    g = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        + 2 * (a.z & b.x).bit_count()
        - (x & z).bit_count()
    ) % 4
    sign = a.sign * b.sign * (-1 if g >= 2 else 1)
    return PauliString(a.n, x, z, sign)


# -- packed-word helpers ----------------------------------------------------


def words_per_block(n: int) -> int:
    return (n + 63) >> 6


def mask_to_words(mask: int, n: int) -> np.ndarray:
    W = words_per_block(n)
    out = np.zeros(W, dtype=np.uint64)
    for w in range(W):
        out[w] = (mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out

def words_to_mask(words: np.ndarray) -> int:
    mask = 0
    for w in range(len(words)):
        mask |= int(words[w]) << (64 * w)
    return mask


# -- GF(2) matrices ----------------------------------------------------------


class BitMatrix:
    """A dense GF(2) matrix, bit-packed into row-major uint64 words."""

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows = rows
        self.cols = cols
        W = words_per_block(cols) if cols else 1
        if words is None:
            words = np.zeros((rows, W), dtype=np.uint64)
        if words.shape != (rows, W):
            raise ValueError(f"bad word array shape {words.shape}")
        self.words = words

    @staticmethod
    def from_dense(arr) -> "BitMatrix":
        arr = np.asarray(arr, dtype=np.uint8) & 1
        rows, cols = arr.shape
        m = BitMatrix(rows, cols)
        for r in range(rows):
            mask = 0
            for c in range(cols):
                mask |= int(arr[r, c]) << c
            m.words[r] = mask_to_words(mask, cols)
        return m

    @staticmethod
    def from_int_rows(masks: Sequence[int], cols: int) -> "BitMatrix":
        m = BitMatrix(len(masks), cols)
        for r, mask in enumerate(masks):
            m.words[r] = mask_to_words(mask, cols)
        return m

    def row_mask(self, r: int) -> int:
        return words_to_mask(self.words[r])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r in range(self.rows):
            mask = self.row_mask(r)
            for c in range(self.cols):
                out[r, c] = (mask >> c) & 1
        return out

    def rank(self) -> int:
        _, pivots = _rref_int_rows([self.row_mask(r) for r in self.rows_range()], self.cols)
        return len(pivots)

    def kernel(self) -> "BitMatrix":
        """Basis of {v : M v = 0 over GF(2)}, one vector per row."""
        basis = gf2_kernel_masks([self.row_mask(r) for r in self.rows_range()], self.cols)
        return BitMatrix.from_int_rows(basis, self.cols)

    def rows_range(self) -> range:
        return range(self.rows)


def _rref_int_rows(rows: list[int], cols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form on integer bit masks; returns (rows, pivot cols)."""
    rows = list(rows)
    pivots: list[int] = []
    pr = 0
    for c in range(cols):
        bit = 1 << c
        hit = -1
        for r in range(pr, len(rows)):
            if rows[r] & bit:
                hit = r
                break
        if hit < 0:
            continue
        rows[pr], rows[hit] = rows[hit], rows[pr]
        for r in range(len(rows)):
            if r != pr and rows[r] & bit:
                rows[r] ^= rows[pr]
        pivots.append(c)
        pr += 1
        if pr == len(rows):
            break
    return rows, pivots


def gf2_rank(m) -> int:
    """GF(2) rank of a BitMatrix or dense 0/1 array."""
    if not isinstance(m, BitMatrix):
        m = BitMatrix.from_dense(m)
    return m.rank()


def gf2_kernel_masks(rows: Iterable[int], cols: int) -> list[int]:
    """Kernel basis of the matrix given as integer row masks."""
    red, pivots = _rref_int_rows(list(rows), cols)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = 1 << f
        for pr, c in enumerate(pivots):
            if (red[pr] >> f) & 1:
                v |= 1 << c
        basis.append(v)
    return basis


def gf2_kernel(m) -> "BitMatrix":
    """Kernel basis (one vector per row) of a BitMatrix or dense array."""
    if not isinstance(m, BitMatrix):
        m = BitMatrix.from_dense(m)
    return m.kernel()


def gf2_solve(rows: Sequence[int], cols: int, target: int) -> int | None:
    """Find a combination mask ``c`` with ``XOR_{i in c} rows[i] == target``.

    Returns None when target is outside the row span.
    """
    # Augment each row with a tag bit recording which inputs were combined.
    tagged = [rows[i] | (1 << (cols + i)) for i in range(len(rows))]
    red, pivots = _rref_int_rows(tagged, cols)
    acc = target
    combo = 0
    body = (1 << cols) - 1
    for pr, c in enumerate(pivots):
        if (acc >> c) & 1:
            acc ^= red[pr] & body
            combo ^= red[pr] >> cols
    if acc:
        return None
    return combo
