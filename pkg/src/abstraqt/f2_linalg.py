"""Bit-packed GF(2) linear algebra for the stabilizer membership test.

Pauli encodings are columns of ``2n`` bits: row ``2i`` holds the x-bit of qubit
``i`` and row ``2i + 1`` its z-bit. A stabilizer list becomes the matrix whose
column ``j`` encodes ``Q_j``, so ``A x = phi(R)`` asks which product of
generators has the same bare part as ``R``.

Rows are packed into 64-bit words and elimination XORs whole rows at once.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .pauli_core import X_BIT, Z_BIT, ConcretePauli, PauliList

W = 64


class BottomError(ValueError):
    """An abstract right-hand side contained an empty entry."""


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    rows, cols = bits.shape
    nwords = max(1, -(-cols // W))
    padded = np.zeros((rows, nwords * W), dtype=np.uint8)
    padded[:, :cols] = bits & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").reshape(rows, nwords).astype(np.uint64)


def _unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


@dataclass
class BitMatrix:
    """A ``rows x cols`` matrix over GF(2), each row packed into 64-bit words."""

    rows: int
    cols: int
    words: np.ndarray = field(repr=False)

    def __post_init__(self):
        nwords = max(1, -(-self.cols // W))
        if self.words.shape != (self.rows, nwords):
            raise ValueError(f"storage shape {self.words.shape} does not fit {self.rows}x{self.cols}")

    @classmethod
    def from_dense(cls, bits) -> "BitMatrix":
        bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
        return cls(bits.shape[0], bits.shape[1], _pack_rows(bits))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, max(1, -(-cols // W))), dtype=np.uint64))

    def to_dense(self) -> np.ndarray:
        return _unpack_rows(self.words, self.cols)

    def get(self, r: int, c: int) -> int:
        return int(self.words[r, c // W] >> np.uint64(c % W)) & 1

    def matvec(self, x) -> np.ndarray:
        return (self.to_dense().astype(np.int64) @ np.asarray(x, dtype=np.int64)) % 2

    def select_rows(self, keep: np.ndarray) -> "BitMatrix":
        words = self.words[np.asarray(keep, dtype=bool)]
        return BitMatrix(words.shape[0], self.cols, words)


def stabilizer_matrix(q: PauliList) -> BitMatrix:
    """The ``2n x m`` matrix whose column ``j`` is the encoding of ``q[j]``."""
    m, n = q.letters.shape
    bits = np.empty((2 * n, m), dtype=np.uint8)
    bits[0::2] = X_BIT[q.letters].T
    bits[1::2] = Z_BIT[q.letters].T
    return BitMatrix.from_dense(bits)


def encode_pauli(p) -> np.ndarray:
    """Encoding of a Pauli as ``2n`` entries.

    Concrete Paulis give bits. Abstract Paulis give abstract-boolean codes
    (``0b01 = {0}``, ``0b10 = {1}``, ``0b11 = {0,1}``) joined over the members
    of each letter set.
    """
    if isinstance(p, ConcretePauli):
        out = np.empty(2 * p.n, dtype=np.uint8)
        out[0::2] = X_BIT[p.letters]
        out[1::2] = Z_BIT[p.letters]
        return out
    from .abstract_pauli import LETTERSET_X_CODE, LETTERSET_Z_CODE

    sets = np.asarray(p.letter_sets, dtype=np.uint8)
    out = np.empty(2 * sets.size, dtype=np.uint8)
    out[0::2] = LETTERSET_X_CODE[sets]
    out[1::2] = LETTERSET_Z_CODE[sets]
    return out


class SolveStatus(enum.Enum):
    NO_SOLUTION = "NoSolution"
    SOLVED = "Solved"


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    particular: np.ndarray | None = None
    null_basis: tuple[np.ndarray, ...] = ()

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED

    def solutions(self):
        """Every solution (``2^len(null_basis)`` of them); for tests."""
        if not self.solved:
            return
        k = len(self.null_basis)
        for mask in range(1 << k):
            x = self.particular.copy()
            for i in range(k):
                if mask >> i & 1:
                    x ^= self.null_basis[i]
            yield x


def _rref(words: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over the first ``ncols`` columns, in place."""
    rows = words.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        w, bit = c // W, np.uint64(1) << np.uint64(c % W)
        has = (words[r:, w] & bit) != 0
        if not has.any():
            continue
        p = r + int(np.argmax(has))
        if p != r:
            words[[r, p]] = words[[p, r]]
        hit = (words[:, w] & bit) != 0
        hit[r] = False
        words[hit] ^= words[r]
        pivots.append(c)
        r += 1
    return words, pivots


def solve(a: BitMatrix, rhs) -> SolveResult:
    """Solve ``a x = rhs`` over GF(2); report a particular solution and a null-space basis."""
    rhs = np.asarray(rhs, dtype=np.uint8).reshape(-1)
    if rhs.size != a.rows:
        raise ValueError(f"rhs has {rhs.size} entries, matrix has {a.rows} rows")
    m = a.cols
    # the rhs becomes an extra column at index m
    if m % W == 0:
        words = np.concatenate([a.words, np.zeros((a.rows, 1), dtype=np.uint64)], axis=1)
    else:
        words = a.words.copy()
    words[:, m // W] |= rhs.astype(np.uint64) << np.uint64(m % W)

    words, pivots = _rref(words, m)
    rank = len(pivots)
    rhs_col = ((words[:, m // W] >> np.uint64(m % W)) & np.uint64(1)).astype(np.uint8)
    if rhs_col[rank:].any():
        return SolveResult(SolveStatus.NO_SOLUTION)

    reduced = _unpack_rows(words[:rank], m) if rank else np.zeros((0, m), dtype=np.uint8)
    x = np.zeros(m, dtype=np.uint8)
    x[pivots] = rhs_col[:rank]
    pivot_set = set(pivots)
    basis = []
    for f in range(m):
        if f in pivot_set:
            continue
        u = np.zeros(m, dtype=np.uint8)
        u[f] = 1
        u[pivots] = reduced[:, f]
        basis.append(u)
    return SolveResult(SolveStatus.SOLVED, x, tuple(basis))


def solve_abstract_rhs(a: BitMatrix, rhs_codes) -> SolveResult:
    """Solve with an abstract right-hand side by dropping every ``{0,1}`` row."""
    codes = np.asarray(rhs_codes, dtype=np.uint8).reshape(-1)
    if codes.size != a.rows:
        raise ValueError(f"rhs has {codes.size} entries, matrix has {a.rows} rows")
    if (codes == 0).any():
        raise BottomError("empty abstract boolean in right-hand side")
    keep = codes != 0b11
    return solve(a.select_rows(keep), (codes[keep] == 0b10).astype(np.uint8))
