"""Dense GF(2) matrices stored as bit-packed uint64 rows.

Column ``c`` of a row lives in word ``c // 64`` at bit ``c % 64``.  All
elimination routines pivot on the first row holding a one in the current
column, scanning columns left to right, so kernel bases and right inverses are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

WORD = 64


class DimensionMismatch(ValueError):
    pass


class RankDeficient(ValueError):
    pass


class FormatError(ValueError):
    pass


def _nwords(cols: int) -> int:
    return max(1, (cols + WORD - 1) // WORD)


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = dense & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").reshape(rows, nw).astype(np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    rows = words.shape[0]
    if rows == 0:
        return np.zeros((0, cols), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(as_bytes.reshape(rows, -1), axis=1, bitorder="little")
    return bits[:, :cols].copy()


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Immutable matrix over GF(2).

    Attributes:
        rows: number of rows.
        cols: number of columns.
        words: packed storage of shape ``(rows, ceil(cols / 64))``.
    """

    rows: int
    cols: int
    words: np.ndarray

    def __post_init__(self) -> None:
        self.words.setflags(write=False)

    # construction

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        arr = np.asarray(dense)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError("BitMatrix needs a 2-D array")
        arr = (arr.astype(np.int64) & 1).astype(np.uint8)
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, _nwords(cols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int]]) -> "BitMatrix":
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for r, c in entries:
            dense[r, c] ^= 1
        return cls.from_dense(dense)

    # views

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words, self.cols)

    def entry(self, r: int, c: int) -> int:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError((r, c))
        return int((int(self.words[r, c // WORD]) >> (c % WORD)) & 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def nnz(self) -> int:
        return int(self.to_dense().sum())

    def row_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=1)

    def col_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0)

    def select_cols(self, idx) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense()[:, idx].reshape(self.rows, -1))

    def select_rows(self, idx) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense()[idx, :].reshape(-1, self.cols))

    def is_zero(self) -> bool:
        return not bool(np.any(self.words))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return BitMatrix(self.rows, self.cols, self.words ^ other.words)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        return mul(self, other)

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def hstack(blocks: list[BitMatrix]) -> BitMatrix:
    rows = {b.rows for b in blocks}
    if len(rows) != 1:
        raise DimensionMismatch("hstack row counts differ")
    return BitMatrix.from_dense(np.hstack([b.to_dense() for b in blocks]))


def vstack(blocks: list[BitMatrix]) -> BitMatrix:
    cols = {b.cols for b in blocks}
    if len(cols) != 1:
        raise DimensionMismatch("vstack column counts differ")
    (c,) = cols
    return BitMatrix(sum(b.rows for b in blocks), c, np.vstack([b.words for b in blocks]))


def mul(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    """Matrix product mod 2."""
    if A.cols != B.rows:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    # float64 BLAS is exact while inner dimension < 2**53
    prod = A.to_dense().astype(np.float64) @ B.to_dense().astype(np.float64)
    return BitMatrix.from_dense(prod.astype(np.int64) & 1)


def _rref(words: np.ndarray, cols: int) -> tuple[np.ndarray, list[int]]:
    """In-place reduced row echelon form; returns (words, pivot columns)."""
    nrows = words.shape[0]
    pivots: list[int] = []
    row = 0
    for c in range(cols):
        if row == nrows:
            break
        wi = c // WORD
        mask = np.uint64(1) << np.uint64(c % WORD)
        colbits = (words[:, wi] & mask) != 0
        below = np.flatnonzero(colbits[row:])
        if below.size == 0:
            continue
        p = row + int(below[0])
        if p != row:
            words[[row, p]] = words[[p, row]]
            colbits[[row, p]] = colbits[[p, row]]
        colbits[row] = False
        hit = np.flatnonzero(colbits)
        if hit.size:
            words[hit] ^= words[row]
        pivots.append(c)
        row += 1
    return words, pivots


def rref(A: BitMatrix) -> tuple[BitMatrix, list[int]]:
    words, piv = _rref(A.words.copy(), A.cols)
    return BitMatrix(A.rows, A.cols, words), piv


def rank(A: BitMatrix) -> int:
    if A.rows == 0 or A.cols == 0:
        return 0
    return len(_rref(A.words.copy(), A.cols)[1])


def row_basis(A: BitMatrix) -> BitMatrix:
    """Full-row-rank matrix with the same row space (the RREF nonzero rows)."""
    words, piv = _rref(A.words.copy(), A.cols)
    return BitMatrix(len(piv), A.cols, words[: len(piv)].copy())


def kernel_basis(A: BitMatrix) -> BitMatrix:
    """Rows span the right kernel {v : A v^T = 0}."""
    n = A.cols
    if A.rows == 0:
        return BitMatrix.identity(n)
    words, piv = _rref(A.words.copy(), n)
    R = _unpack(words[: len(piv)], n)
    pivset = set(piv)
    free = [c for c in range(n) if c not in pivset]
    K = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        K[i, f] = 1
        K[i, piv] = R[:, f]
    return BitMatrix.from_dense(K) if free else BitMatrix.zeros(0, n)


def right_inverse(A: BitMatrix) -> BitMatrix:
    """Gamma with A @ Gamma = I; raises RankDeficient unless A has full row rank.

    Pivot columns are scanned lightest first (ties by index), so unit columns
    of A are used directly and Gamma stays sparse.
    """
    r, c = A.shape
    if r == 0:
        return BitMatrix.zeros(c, 0)
    w = A.col_weights()
    order = sorted(range(c), key=lambda j: (int(w[j]), j))
    aug = hstack([A.select_cols(order), BitMatrix.identity(r)])
    words, piv = _rref(aug.words.copy(), aug.cols)
    piv = [order[p] for p in piv if p < c]
    if len(piv) < r:
        raise RankDeficient(f"rank {len(piv)} < rows {r}")
    E = _unpack(words, aug.cols)[:, c:]  # E @ A[:, order] = RREF
    G0 = np.zeros((c, r), dtype=np.uint8)
    for i, p in enumerate(piv):
        G0[p, i] = 1
    gamma = (G0.astype(np.int64) @ E.astype(np.int64)) & 1
    return BitMatrix.from_dense(gamma)


def row_space_contains(A: BitMatrix, v: BitMatrix) -> bool:
    if v.rows != 1 or v.cols != A.cols:
        raise DimensionMismatch(f"vector {v.shape} vs matrix {A.shape}")
    if v.is_zero():
        return True
    return rank(vstack([A, v])) == rank(A)


def span_contains(A: BitMatrix, V: BitMatrix) -> bool:
    """True when every row of V lies in Row(A)."""
    if V.rows == 0:
        return True
    return rank(vstack([A, V])) == rank(A)


# F2M coordinate format

def write_f2m(A: BitMatrix, path) -> None:
    Path(path).write_text(dumps_f2m(A), encoding="ascii")


def dumps_f2m(A: BitMatrix) -> str:
    r, c = np.nonzero(A.to_dense())
    lines = [f"F2M 1 {A.rows} {A.cols} {len(r)}"]
    lines += [f"{i} {j}" for i, j in zip(r.tolist(), c.tolist())]
    return "\n".join(lines) + "\n"


def loads_f2m(text: str) -> BitMatrix:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty input")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "F2M" or head[1] != "1":
        raise FormatError(f"bad header: {lines[0]!r}")
    rows, cols, nnz = (int(x) for x in head[2:])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != nnz:
        raise FormatError(f"expected {nnz} entries, found {len(body)}")
    seen = set()
    entries = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"bad entry line {ln!r}")
        r, c = int(parts[0]), int(parts[1])
        if not (0 <= r < rows and 0 <= c < cols):
            raise FormatError(f"entry out of range: {r} {c}")
        if (r, c) in seen:
            raise FormatError(f"duplicate entry: {r} {c}")
        seen.add((r, c))
        entries.append((r, c))
    if entries != sorted(entries):
        raise FormatError("entries not sorted")
    return BitMatrix.from_entries(rows, cols, entries)


def read_f2m(path) -> BitMatrix:
    return loads_f2m(Path(path).read_text(encoding="ascii"))
