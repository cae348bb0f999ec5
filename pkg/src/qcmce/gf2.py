"""Binary circulant matrices and quasi-cyclic block matrices.

A p x p circulant is stored as its first row packed into a Python int: bit i
of ``Circulant.bits`` is the entry in column i of row 0, equivalently the
coefficient of x^i of a polynomial modulo x^p - 1.  Row j is the first row
cyclically shifted right by j, so matrix products of circulants are
polynomial products, a row vector times a circulant is a polynomial product,
and transposition maps c(x) to c(x^-1).

Vectors cross the public boundary as numpy uint8 arrays of 0/1 values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, Singular

# Below this weight a product is a plain XOR of rotations over the support.
SPARSE_WEIGHT = 64


def _mask(p: int) -> int:
    return (1 << p) - 1


def _rotl(x: int, s: int, p: int) -> int:
    if s == 0:
        return x
    return ((x << s) | (x >> (p - s))) & _mask(p)


def _support(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def _fold(c: int, p: int) -> int:
    """Reduce an arbitrary polynomial modulo x^p - 1."""
    mask = _mask(p)
    while c >> p:
        c = (c & mask) ^ (c >> p)
    return c


def _clmul(a: int, b: int) -> int:
    """Carry-less product of two polynomials, 8-bit comb method."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    if b == 0:
        return 0
    if b.bit_count() <= 8:
        out = 0
        for s in _support(b):
            out ^= a << s
        return out
    table = [0] * 256
    table[1] = b
    for v in range(2, 256):
        table[v] = table[v >> 1] << 1 if v & 1 == 0 else table[v - 1] ^ b
    out = 0
    shift = 0
    while a:
        chunk = a & 0xFF
        if chunk:
            out ^= table[chunk] << shift
        a >>= 8
        shift += 8
    return out


def _polydivmod(a: int, b: int) -> tuple[int, int]:
    db = b.bit_length() - 1
    q = 0
    while a and a.bit_length() - 1 >= db:
        s = a.bit_length() - 1 - db
        q ^= 1 << s
        a ^= b << s
    return q, a


@dataclass(frozen=True)
class Circulant:
    p: int
    bits: int = 0

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError(f"block size must be positive, got {self.p}")
        if self.bits < 0 or self.bits >> self.p:
            raise ValueError("first row does not fit in p bits")

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    @property
    def support(self) -> list[int]:
        return _support(self.bits)

    def first_row(self) -> np.ndarray:
        return int_to_bits(self.bits, self.p)

    def is_zero(self) -> bool:
        return self.bits == 0

    @classmethod
    def identity(cls, p: int) -> "Circulant":
        return cls(p, 1)

    @classmethod
    def zero(cls, p: int) -> "Circulant":
        return cls(p, 0)

    @classmethod
    def from_first_row(cls, row: Sequence[int] | np.ndarray) -> "Circulant":
        row = np.asarray(row, dtype=np.uint8)
        return cls(len(row), bits_to_int(row))

    def __add__(self, other: "Circulant") -> "Circulant":
        _check_same_p(self, other)
        return Circulant(self.p, self.bits ^ other.bits)

    def __mul__(self, other: "Circulant") -> "Circulant":
        return circ_mul(self, other)

    def __repr__(self) -> str:
        sup = self.support
        if len(sup) > 12:
            return f"Circulant(p={self.p}, weight={len(sup)})"
        return f"Circulant(p={self.p}, support={sup})"


def _check_same_p(a: Circulant, b: Circulant) -> None:
    if a.p != b.p:
        raise DimensionError(f"block size mismatch: {a.p} vs {b.p}")


def int_to_bits(x: int, length: int) -> np.ndarray:
    raw = x.to_bytes((length + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=length, bitorder="little")


def bits_to_int(bits: np.ndarray) -> int:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def circ_from_support(p: int, support: Iterable[int]) -> Circulant:
    bits = 0
    for i in support:
        if not 0 <= i < p:
            raise ValueError(f"support index {i} out of range [0, {p})")
        if bits >> i & 1:
            raise ValueError(f"duplicate support index {i}")
        bits |= 1 << i
    return Circulant(p, bits)


def circ_mul(a: Circulant, b: Circulant) -> Circulant:
    _check_same_p(a, b)
    p = a.p
    wa, wb = a.weight, b.weight
    if min(wa, wb) <= SPARSE_WEIGHT:
        sparse, dense = (a, b) if wa <= wb else (b, a)
        out = 0
        for s in _support(sparse.bits):
            out ^= _rotl(dense.bits, s, p)
        return Circulant(p, out)
    return Circulant(p, _fold(_clmul(a.bits, b.bits), p))


def circ_transpose(a: Circulant) -> Circulant:
    # c'[i] = c[(p - i) mod p]
    p = a.p
    low = a.bits & 1
    rest = a.bits >> 1
    rev = int(format(rest, f"0{p - 1}b")[::-1], 2) if p > 1 and rest else 0
    return Circulant(p, low | (rev << 1))


def circ_inv(a: Circulant) -> Circulant:
    """Inverse in GF(2)[x]/(x^p - 1) by the extended Euclidean algorithm."""
    p = a.p
    if a.bits == 0 or a.weight % 2 == 0:
        raise Singular("even-weight circulant has no inverse")
    if a.bits == 1:
        return a
    r0, r1 = (1 << p) | 1, a.bits
    s0, s1 = 0, 1
    while r1:
        q, r = _polydivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 ^ _clmul(q, s1)
    if r0 != 1:
        raise Singular("circulant shares a factor with x^p - 1")
    return Circulant(p, _fold(s0, p))


def is_invertible(a: Circulant) -> bool:
    try:
        circ_inv(a)
    except Singular:
        return False
    return True


@dataclass(frozen=True)
class QcMatrix:
    """rows0 x cols0 grid of p x p circulant blocks."""

    rows0: int
    cols0: int
    p: int
    blocks: tuple[tuple[Circulant, ...], ...]

    def __post_init__(self):
        if len(self.blocks) != self.rows0 or any(len(r) != self.cols0 for r in self.blocks):
            raise DimensionError("block grid shape does not match rows0 x cols0")
        for row in self.blocks:
            for c in row:
                if c.p != self.p:
                    raise DimensionError("all blocks must share the same p")

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[Circulant]]) -> "QcMatrix":
        grid = tuple(tuple(r) for r in blocks)
        if not grid or not grid[0]:
            raise DimensionError("empty block grid")
        return cls(len(grid), len(grid[0]), grid[0][0].p, grid)

    @classmethod
    def identity(cls, size0: int, p: int) -> "QcMatrix":
        one, zero = Circulant.identity(p), Circulant.zero(p)
        return cls.from_blocks([[one if i == j else zero for j in range(size0)] for i in range(size0)])

    @classmethod
    def zeros(cls, rows0: int, cols0: int, p: int) -> "QcMatrix":
        zero = Circulant.zero(p)
        return cls.from_blocks([[zero] * cols0 for _ in range(rows0)])

    def __getitem__(self, ij: tuple[int, int]) -> Circulant:
        i, j = ij
        return self.blocks[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows0 * self.p, self.cols0 * self.p

    def block_weights(self) -> list[list[int]]:
        return [[c.weight for c in row] for row in self.blocks]

    def row_weights(self) -> list[int]:
        return [sum(c.weight for c in row) for row in self.blocks]

    def column_weights(self) -> list[int]:
        return [sum(self.blocks[i][j].weight for i in range(self.rows0)) for j in range(self.cols0)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "QcMatrix":
        return QcMatrix.from_blocks([[self.blocks[i][j] for j in cols] for i in rows])

    def __matmul__(self, other: "QcMatrix") -> "QcMatrix":
        return qc_mul(self, other)


def qc_mul(a: QcMatrix, b: QcMatrix) -> QcMatrix:
    if a.cols0 != b.rows0 or a.p != b.p:
        raise DimensionError(f"cannot multiply {a.rows0}x{a.cols0} by {b.rows0}x{b.cols0} (p={a.p}/{b.p})")
    p = a.p
    out = []
    for i in range(a.rows0):
        row = []
        for j in range(b.cols0):
            acc = 0
            for k in range(a.cols0):
                x, y = a.blocks[i][k], b.blocks[k][j]
                if x.bits and y.bits:
                    acc ^= circ_mul(x, y).bits
            row.append(Circulant(p, acc))
        out.append(row)
    return QcMatrix.from_blocks(out)


def qc_transpose(a: QcMatrix) -> QcMatrix:
    return QcMatrix.from_blocks(
        [[circ_transpose(a.blocks[i][j]) for i in range(a.rows0)] for j in range(a.cols0)]
    )


def vec_to_blocks(v: np.ndarray, nblocks: int, p: int) -> list[int]:
    v = np.asarray(v, dtype=np.uint8)
    if v.ndim != 1 or len(v) != nblocks * p:
        raise DimensionError(f"expected vector of length {nblocks * p}, got shape {v.shape}")
    return [bits_to_int(v[i * p:(i + 1) * p]) for i in range(nblocks)]


def blocks_to_vec(blocks: Sequence[int], p: int) -> np.ndarray:
    return np.concatenate([int_to_bits(b, p) for b in blocks]) if blocks else np.zeros(0, np.uint8)


def qc_vec_mul_blocks(v: Sequence[int], a: QcMatrix) -> list[int]:
    """Same as :func:`qc_vec_mul` on block-packed ints."""
    if len(v) != a.rows0:
        raise DimensionError(f"vector has {len(v)} blocks, matrix has {a.rows0} block rows")
    p = a.p
    out = [0] * a.cols0
    for i, vi in enumerate(v):
        if not vi:
            continue
        ci = Circulant(p, vi)
        for j in range(a.cols0):
            blk = a.blocks[i][j]
            if blk.bits:
                out[j] ^= circ_mul(ci, blk).bits
    return out


def qc_vec_mul(v: np.ndarray, a: QcMatrix) -> np.ndarray:
    return blocks_to_vec(qc_vec_mul_blocks(vec_to_blocks(v, a.rows0, a.p), a), a.p)


def qc_inv(a: QcMatrix) -> QcMatrix:
    """Inverse by block Gauss-Jordan over GF(2)[x]/(x^p - 1).

    The block ring has zero divisors, so when a column offers no invertible
    pivot the whole problem drops to dense GF(2) elimination and the result is
    folded back into circulant blocks.
    """
    if a.rows0 != a.cols0:
        raise DimensionError("qc_inv needs a square block grid")
    n0, p = a.rows0, a.p
    # evaluating at x = 1 is a ring map onto GF(2): the weight-parity matrix
    # must be invertible, and checking it first avoids a doomed dense pass
    if gf2_rank_rows([sum((blk.weight & 1) << j for j, blk in enumerate(row)) for row in a.blocks]) < n0:
        raise Singular("block weight parity matrix is singular")
    m = [[blk.bits for blk in row] + [1 if i == j else 0 for j in range(n0)] for i, row in enumerate(a.blocks)]
    for col in range(n0):
        pivot_inv = None
        for r in range(col, n0):
            x = m[r][col]
            if x and x.bit_count() % 2:
                try:
                    pivot_inv = circ_inv(Circulant(p, x))
                except Singular:
                    continue
                m[col], m[r] = m[r], m[col]
                break
        if pivot_inv is None:
            return _qc_inv_dense(a)
        m[col] = [circ_mul(pivot_inv, Circulant(p, x)).bits if x else 0 for x in m[col]]
        prow = [Circulant(p, x) for x in m[col]]
        for r in range(n0):
            f = m[r][col]
            if r == col or not f:
                continue
            fc = Circulant(p, f)
            m[r] = [x ^ circ_mul(fc, pc).bits if pc.bits else x for x, pc in zip(m[r], prow)]
    return QcMatrix.from_blocks([[Circulant(p, x) for x in row[n0:]] for row in m])


def gf2_rank_rows(rows: Sequence[int]) -> int:
    """Rank over GF(2) of a matrix given as int-packed rows."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def _circ_dense_row(bits: int, p: int, shift: int) -> int:
    return _rotl(bits, shift, p)


def _qc_inv_dense(a: QcMatrix) -> QcMatrix:
    n0, p = a.rows0, a.p
    size = n0 * p
    rows = []
    for bi in range(n0):
        for j in range(p):
            r = 0
            for bj in range(n0):
                r |= _circ_dense_row(a.blocks[bi][bj].bits, p, j) << (bj * p)
            rows.append(r | (1 << (size + bi * p + j)))
    for c in range(size):
        bit = 1 << c
        piv = next((r for r in range(c, size) if rows[r] & bit), None)
        if piv is None:
            raise Singular("QC matrix is singular")
        rows[c], rows[piv] = rows[piv], rows[c]
        pr = rows[c]
        for r in range(size):
            if r != c and rows[r] & bit:
                rows[r] ^= pr
    mask = _mask(p)
    inv = [[Circulant(p, (rows[bi * p] >> (size + bj * p)) & mask) for bj in range(n0)] for bi in range(n0)]
    return QcMatrix.from_blocks(inv)


def qc_is_invertible(a: QcMatrix) -> bool:
    try:
        qc_inv(a)
    except Singular:
        return False
    return True
