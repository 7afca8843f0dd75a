"""Abstract Pauli elements: a prefactor set times a per-qubit product of letter sets.

A letter set is a 4-bit indicator (bit 0 = I, 1 = X, 2 = Y, 3 = Z). Per-qubit
products and commutators of letter sets come from 16x16 tables derived from the
concrete letter tables in :mod:`pauli_core`.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .abstract_domains import (
    BOOL_ADD,
    DOUBLE_BOOL,
    Z4_ADD,
    AbstractBool,
    AbstractZ4,
    z4_sum_codes,
)
from .pauli_core import (
    COMM,
    LETTERS,
    MUL_LETTER,
    MUL_PHASE,
    X_BIT,
    Z_BIT,
    CliffordTable,
    ConcretePauli,
    NotCliffordError,
    _check_targets,
)


def _set_members(code: int) -> tuple[int, ...]:
    return tuple(k for k in range(4) if code >> k & 1)


def _build_set_tables():
    mul_letters = np.zeros((16, 16), dtype=np.uint8)
    mul_phase = np.zeros((16, 16), dtype=np.uint8)
    comm = np.zeros((16, 16), dtype=np.uint8)
    for a, b in itertools.product(range(16), repeat=2):
        for p in _set_members(a):
            for q in _set_members(b):
                mul_letters[a, b] |= 1 << MUL_LETTER[p, q]
                mul_phase[a, b] |= 1 << MUL_PHASE[p, q]
                comm[a, b] |= 1 << COMM[p, q]
    x_code = np.zeros(16, dtype=np.uint8)
    z_code = np.zeros(16, dtype=np.uint8)
    for s in range(16):
        for p in _set_members(s):
            x_code[s] |= 1 << X_BIT[p]
            z_code[s] |= 1 << Z_BIT[p]
    tables = (mul_letters, mul_phase, comm, x_code, z_code)
    for t in tables:
        t.setflags(write=False)
    return tables


# per-qubit tables over letter-set codes: product letters, product phase set
# (Z4 code), commutator set (boolean code), and the encodings' x/z bit sets
LS_MUL_LETTERS, LS_MUL_PHASE, LS_COMM, LETTERSET_X_CODE, LETTERSET_Z_CODE = _build_set_tables()

# singleton code -> member value (Z4 codes 1,2,4,8 -> 0..3), -1 otherwise
_SINGLE_VALUE = np.full(16, -1, dtype=np.int8)
for _v in range(4):
    _SINGLE_VALUE[1 << _v] = _v
_SINGLE_VALUE.setflags(write=False)


def _frozen_sets(sets) -> np.ndarray:
    arr = np.array(sets, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 15:
        raise ValueError("letter-set codes must be 4-bit")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AbstractPauli:
    """``i^prefactor * S_0 (x) ... (x) S_{n-1}`` with ``prefactor`` a Z4 code and ``S_k`` letter-set codes."""

    prefactor: int
    letter_sets: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "prefactor", int(self.prefactor))
        object.__setattr__(self, "letter_sets", _frozen_sets(self.letter_sets))

    @classmethod
    def identity(cls, n: int) -> "AbstractPauli":
        return cls(0b0001, np.ones(n, dtype=np.uint8))

    @classmethod
    def from_sets(cls, prefactors: Sequence[int], sets: Sequence[str]) -> "AbstractPauli":
        """Build from readable parts, e.g. ``from_sets([0, 3], ["ZY", "X"])``."""
        codes = [sum(1 << LETTERS.index(c) for c in s.upper()) for s in sets]
        return cls(AbstractZ4.of(*prefactors).bits, codes)

    @property
    def n(self) -> int:
        return int(self.letter_sets.size)

    @property
    def pref(self) -> AbstractZ4:
        return AbstractZ4(self.prefactor)

    def is_bottom(self) -> bool:
        return self.prefactor == 0 or bool((self.letter_sets == 0).any())

    def is_singleton(self) -> bool:
        return _SINGLE_VALUE[self.prefactor] >= 0 and bool((_SINGLE_VALUE[self.letter_sets] >= 0).all())

    def members(self) -> Iterator[ConcretePauli]:
        """Enumerate the concretization (exponential in n; for tests)."""
        per_qubit = [_set_members(int(s)) for s in self.letter_sets]
        for v in _set_members(self.prefactor):
            for letters in itertools.product(*per_qubit):
                yield ConcretePauli(np.array(letters, dtype=np.uint8), v)

    def contains(self, p: ConcretePauli) -> bool:
        if p.n != self.n or not self.prefactor >> p.prefactor & 1:
            return False
        return bool(((self.letter_sets >> p.letters) & 1).all())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AbstractPauli):
            return NotImplemented
        return self.prefactor == other.prefactor and np.array_equal(self.letter_sets, other.letter_sets)

    def __hash__(self) -> int:
        return hash((self.prefactor, self.letter_sets.tobytes()))

    def __mul__(self, other: "AbstractPauli") -> "AbstractPauli":
        return apauli_mul(self, other)

    def __or__(self, other: "AbstractPauli") -> "AbstractPauli":
        return apauli_join(self, other)

    def __str__(self) -> str:
        sets = " (x) ".join("{" + ",".join(LETTERS[k] for k in _set_members(int(s))) + "}" for s in self.letter_sets)
        return f"i^{AbstractZ4(self.prefactor)!r} {sets}"

    __repr__ = __str__


def lift(p: ConcretePauli) -> AbstractPauli:
    """The singleton abstract Pauli ``{p}``."""
    return AbstractPauli(1 << p.prefactor, (np.uint8(1) << p.letters).astype(np.uint8))


def _check_same_size(a: AbstractPauli, b: AbstractPauli) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def _z4_sum(start: int, codes: np.ndarray) -> int:
    """Abstract sum ``start + codes[0] + ...`` over Z4 codes, fast on singletons."""
    vals = _SINGLE_VALUE[codes]
    single = vals >= 0
    acc = int(Z4_ADD[start, 1 << (int(vals[single].sum()) % 4)]) if single.any() else start
    if not single.all():
        acc = z4_sum_codes(codes[~single].tolist(), acc)
    return acc


def _bool_sum(codes: np.ndarray) -> int:
    """Abstract boolean sum of the codes (empty sum is ``{0}``)."""
    if (codes == 0).any():
        return 0
    ones = int((codes == 0b10).sum()) & 1
    acc = 0b10 if ones else 0b01
    if (codes == 0b11).any():
        acc = int(BOOL_ADD[acc, 0b11])
    return acc


def apauli_mul(a: AbstractPauli, b: AbstractPauli) -> AbstractPauli:
    _check_same_size(a, b)
    letters = LS_MUL_LETTERS[a.letter_sets, b.letter_sets]
    contrib = LS_MUL_PHASE[a.letter_sets, b.letter_sets]
    pref = _z4_sum(int(Z4_ADD[a.prefactor, b.prefactor]), contrib)
    return AbstractPauli(pref, letters)


def apauli_prefactor_of_product(a: AbstractPauli, b: AbstractPauli) -> AbstractZ4:
    return AbstractZ4(apauli_mul(a, b).prefactor)


def apauli_commutator(a: AbstractPauli, b: AbstractPauli) -> AbstractBool:
    _check_same_size(a, b)
    return AbstractBool(_bool_sum(LS_COMM[a.letter_sets, b.letter_sets]))


def apauli_join(a: AbstractPauli, b: AbstractPauli) -> AbstractPauli:
    _check_same_size(a, b)
    return AbstractPauli(a.prefactor | b.prefactor, a.letter_sets | b.letter_sets)


def apauli_sign_flip(b: AbstractBool | int, p: AbstractPauli) -> AbstractPauli:
    """``(-1)^b * p``."""
    code = b.bits if isinstance(b, AbstractBool) else int(b)
    return AbstractPauli(int(Z4_ADD[p.prefactor, DOUBLE_BOOL[code]]), p.letter_sets)


def apauli_pref(p: AbstractPauli) -> AbstractZ4:
    return AbstractZ4(p.prefactor)


def apauli_bare(p: AbstractPauli) -> AbstractPauli:
    return AbstractPauli(0b0001, p.letter_sets)


@functools.lru_cache(maxsize=65536)
def _conjugate_window(gate: CliffordTable, window: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Join of the conjugations of every member of a window of letter sets."""
    k = len(window)
    out = [0] * k
    phases = 0
    for letters in itertools.product(*(_set_members(s) for s in window)):
        new, phase = gate.lookup(letters)
        for i, c in enumerate(new):
            out[i] |= 1 << c
        phases |= 1 << phase
    return tuple(out), phases


def apauli_conjugate(gate: CliffordTable, targets: Sequence[int], p: AbstractPauli) -> AbstractPauli:
    if not isinstance(gate, CliffordTable):
        raise NotCliffordError("conjugation needs a Clifford gate; decompose it instead")
    _check_targets(targets, gate.num_qubits, p.n)
    t = list(targets)
    window = tuple(int(s) for s in p.letter_sets[t])
    if 0 in window:
        return AbstractPauli(p.prefactor, np.zeros(p.n, dtype=np.uint8))
    new, phases = _conjugate_window(gate, window)
    sets = p.letter_sets.copy()
    sets[t] = new
    return AbstractPauli(int(Z4_ADD[p.prefactor, phases]), sets)
