"""Exact Pauli-group algebra.

Letters are stored as small integers ``I=0, X=1, Y=2, Z=3``. A Pauli element
``i^v * P0 (x) ... (x) P(n-1)`` keeps ``v`` (mod 4) apart from its letters, and
all letter-level products, phases and commutators come from 4x4 lookup tables
built once at import time from the dense 2x2 matrices.

Qubit 0 is the leftmost tensor factor (most significant bit of a basis index).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

LETTERS = "IXYZ"

I_MAT = np.eye(2, dtype=complex)
X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
Y_MAT = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_MAT = np.array([[1, 0], [0, -1]], dtype=complex)
LETTER_MATRICES = (I_MAT, X_MAT, Y_MAT, Z_MAT)

PAULI_ATOL = 1e-9
DROP_ATOL = 1e-12
MAX_DENSE_QUBITS = 12

_I_POWERS = (1, 1j, -1, -1j)


def _match_scaled_letter(m: np.ndarray) -> tuple[int, int]:
    for letter, base in enumerate(LETTER_MATRICES):
        for v, s in enumerate(_I_POWERS):
            if np.allclose(m, s * base, atol=PAULI_ATOL):
                return letter, v
    raise AssertionError("product of Pauli matrices left the Pauli group")


def _build_letter_tables():
    mul_letter = np.zeros((4, 4), dtype=np.uint8)
    mul_phase = np.zeros((4, 4), dtype=np.uint8)
    comm = np.zeros((4, 4), dtype=np.uint8)
    for a, b in itertools.product(range(4), repeat=2):
        ma, mb = LETTER_MATRICES[a], LETTER_MATRICES[b]
        mul_letter[a, b], mul_phase[a, b] = _match_scaled_letter(ma @ mb)
        comm[a, b] = 0 if np.allclose(ma @ mb, mb @ ma) else 1
    for t in (mul_letter, mul_phase, comm):
        t.setflags(write=False)
    return mul_letter, mul_phase, comm


# a*b = i^MUL_PHASE[a,b] * MUL_LETTER[a,b]; COMM[a,b] = 1 iff a, b anticommute
MUL_LETTER, MUL_PHASE, COMM = _build_letter_tables()

# symplectic encoding: I=(0,0), X=(1,0), Y=(1,1), Z=(0,1)
X_BIT = np.array([0, 1, 1, 0], dtype=np.uint8)
Z_BIT = np.array([0, 0, 1, 1], dtype=np.uint8)


def _frozen_letters(letters) -> np.ndarray:
    if isinstance(letters, str):
        arr = np.array([LETTERS.index(c) for c in letters.upper()], dtype=np.uint8)
    else:
        arr = np.array(letters, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 3:
        raise ValueError(f"invalid Pauli letter code in {letters!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ConcretePauli:
    """A Pauli group element ``i^prefactor * letters[0] (x) ... (x) letters[n-1]``."""

    letters: np.ndarray
    prefactor: int = 0

    def __post_init__(self):
        object.__setattr__(self, "letters", _frozen_letters(self.letters))
        object.__setattr__(self, "prefactor", int(self.prefactor) % 4)
        if self.letters.size == 0:
            raise ValueError("a Pauli element needs at least one qubit")

    @classmethod
    def from_str(cls, text: str) -> "ConcretePauli":
        """Parse ``"XZ"``, ``"-XZ"``, ``"+iY"``, ``"-iZZ"`` and similar."""
        s = text.strip()
        v = 0
        if s[:1] in "+-":
            v = 2 if s[0] == "-" else 0
            s = s[1:]
        if s[:1] == "i":
            v += 1
            s = s[1:]
        return cls(s, v)

    @classmethod
    def identity(cls, n: int) -> "ConcretePauli":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def single(cls, n: int, qubit: int, letter: str | int, prefactor: int = 0) -> "ConcretePauli":
        """``letter`` on ``qubit`` and identity elsewhere."""
        arr = np.zeros(n, dtype=np.uint8)
        arr[qubit] = LETTERS.index(letter) if isinstance(letter, str) else letter
        return cls(arr, prefactor)

    @property
    def n(self) -> int:
        return int(self.letters.size)

    def bare(self) -> "ConcretePauli":
        return ConcretePauli(self.letters, 0) if self.prefactor else self

    def with_prefactor(self, v: int) -> "ConcretePauli":
        return ConcretePauli(self.letters, v)

    def is_hermitian(self) -> bool:
        return self.prefactor % 2 == 0

    def __neg__(self) -> "ConcretePauli":
        return ConcretePauli(self.letters, self.prefactor + 2)

    def __mul__(self, other: "ConcretePauli") -> "ConcretePauli":
        return multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConcretePauli):
            return NotImplemented
        return self.prefactor == other.prefactor and np.array_equal(self.letters, other.letters)

    def __hash__(self) -> int:
        return hash((self.prefactor, self.letters.tobytes()))

    def __str__(self) -> str:
        sign = ("+", "+i", "-", "-i")[self.prefactor]
        return sign + "".join(LETTERS[c] for c in self.letters)

    def __repr__(self) -> str:
        return f"ConcretePauli({str(self)!r})"


def _check_same_size(a: ConcretePauli, b: ConcretePauli) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: ConcretePauli, b: ConcretePauli) -> ConcretePauli:
    _check_same_size(a, b)
    phase = int(MUL_PHASE[a.letters, b.letters].sum())
    return ConcretePauli(MUL_LETTER[a.letters, b.letters], a.prefactor + b.prefactor + phase)


def commutator(a: ConcretePauli, b: ConcretePauli) -> int:
    """0 if ``a`` and ``b`` commute, 1 if they anticommute."""
    _check_same_size(a, b)
    return int(COMM[a.letters, b.letters].sum()) & 1


def pauli_matrix(letters: Sequence[int]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, LETTER_MATRICES[c])
    return out


def dense(p: ConcretePauli) -> np.ndarray:
    """The ``2^n x 2^n`` matrix of ``p``."""
    if p.n > MAX_DENSE_QUBITS:
        raise ValueError(f"refusing to build a dense matrix for {p.n} > {MAX_DENSE_QUBITS} qubits")
    return _I_POWERS[p.prefactor] * pauli_matrix(p.letters)


def window_index(letters: Iterable[int]) -> int:
    """Row index of a letter tuple in a gate table (first letter most significant)."""
    idx = 0
    for c in letters:
        idx = 4 * idx + int(c)
    return idx


def window_letters(idx: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        idx, c = divmod(idx, 4)
        out.append(c)
    return tuple(reversed(out))


@dataclass(frozen=True)
class CliffordTable:
    """Conjugation action of a k-qubit Clifford on every bare Pauli tuple.

    ``U P U^dag = i^phases[idx] * letters[idx]`` for ``P`` the bare tuple with
    :func:`window_index` ``idx``.
    """

    num_qubits: int
    letters: tuple[tuple[int, ...], ...]
    phases: tuple[int, ...]
    _letters_arr: np.ndarray = field(init=False, repr=False, compare=False)
    _phases_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        la = np.array(self.letters, dtype=np.uint8).reshape(4**self.num_qubits, self.num_qubits)
        pa = np.array(self.phases, dtype=np.uint8)
        la.setflags(write=False)
        pa.setflags(write=False)
        object.__setattr__(self, "_letters_arr", la)
        object.__setattr__(self, "_phases_arr", pa)

    def lookup(self, window: Sequence[int]) -> tuple[tuple[int, ...], int]:
        idx = window_index(window)
        return self.letters[idx], self.phases[idx]


@dataclass(frozen=True)
class PauliSumDecomposition:
    """``U = sum_p coefficient_p * R_p`` with ``R_p`` bare k-qubit Pauli tuples."""

    num_qubits: int
    terms: tuple[tuple[complex, tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.terms)

    def to_matrix(self) -> np.ndarray:
        d = 2**self.num_qubits
        out = np.zeros((d, d), dtype=complex)
        for coeff, letters in self.terms:
            out += coeff * pauli_matrix(letters)
        return out


GateAction = CliffordTable | PauliSumDecomposition


class NotCliffordError(ValueError):
    """Raised when a conjugation table is requested for a non-Clifford gate."""


def _pauli_basis(k: int) -> np.ndarray:
    return np.array([pauli_matrix(window_letters(i, k)) for i in range(4**k)])


def classify_gate(unitary: np.ndarray) -> GateAction:
    """Return a conjugation table if ``unitary`` is Clifford, else its Pauli-sum decomposition."""
    u = np.asarray(unitary, dtype=complex)
    d = u.shape[0]
    k = d.bit_length() - 1
    if u.shape != (d, d) or 2**k != d or k < 1:
        raise ValueError(f"expected a 2^k x 2^k matrix, got shape {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(d), atol=PAULI_ATOL):
        raise ValueError("matrix is not unitary")

    basis = _pauli_basis(k)
    letters_out, phases_out = [], []
    for idx in range(4**k):
        image = u @ basis[idx] @ u.conj().T
        coeffs = np.einsum("pij,ij->p", basis.conj(), image) / d
        best = int(np.argmax(np.abs(coeffs)))
        rest = np.delete(coeffs, best)
        match = [v for v, s in enumerate(_I_POWERS) if abs(coeffs[best] - s) <= PAULI_ATOL]
        if not match or (rest.size and np.abs(rest).max() > PAULI_ATOL):
            break
        letters_out.append(window_letters(best, k))
        phases_out.append(match[0])
    else:
        return CliffordTable(k, tuple(letters_out), tuple(phases_out))

    coeffs = np.einsum("pij,ij->p", basis.conj(), u) / d
    terms = tuple(
        (complex(c), window_letters(i, k)) for i, c in enumerate(coeffs) if abs(c) > DROP_ATOL
    )
    return PauliSumDecomposition(k, terms)


def _check_targets(targets: Sequence[int], k: int, n: int) -> None:
    if len(targets) != k:
        raise ValueError(f"gate acts on {k} qubits, got targets {tuple(targets)}")
    if len(set(targets)) != k:
        raise ValueError(f"targets must be distinct: {tuple(targets)}")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"targets {tuple(targets)} out of range for {n} qubits")


def conjugate_concrete(gate: GateAction, targets: Sequence[int], p: ConcretePauli) -> ConcretePauli:
    """``U_pad p U_pad^dag`` for a Clifford ``gate`` applied on ``targets``."""
    if not isinstance(gate, CliffordTable):
        raise NotCliffordError("conjugation needs a Clifford gate; decompose it instead")
    _check_targets(targets, gate.num_qubits, p.n)
    new_letters, phase = gate.lookup(p.letters[list(targets)])
    letters = p.letters.copy()
    letters[list(targets)] = new_letters
    return ConcretePauli(letters, p.prefactor + phase)


def embed_letters(window: Sequence[int], targets: Sequence[int], n: int) -> ConcretePauli:
    """Lift a bare k-qubit letter tuple on ``targets`` to an n-qubit Pauli."""
    letters = np.zeros(n, dtype=np.uint8)
    letters[list(targets)] = window
    return ConcretePauli(letters)


class PauliList:
    """An immutable list of n-qubit Pauli elements stored as a letter matrix.

    Used for stabilizer generators, where whole-list conjugation and
    commutator checks are vectorized over rows.
    """

    __slots__ = ("letters", "prefactors")

    def __init__(self, letters: np.ndarray, prefactors: np.ndarray):
        letters = np.array(letters, dtype=np.uint8)
        prefactors = np.array(prefactors, dtype=np.uint8) % 4
        if letters.ndim != 2 or letters.shape[0] != prefactors.shape[0]:
            raise ValueError("letters must be (rows, n) with one prefactor per row")
        letters.setflags(write=False)
        prefactors.setflags(write=False)
        self.letters = letters
        self.prefactors = prefactors

    @classmethod
    def from_paulis(cls, paulis: Iterable[ConcretePauli]) -> "PauliList":
        paulis = list(paulis)
        return cls(np.array([p.letters for p in paulis]), np.array([p.prefactor for p in paulis]))

    @classmethod
    def computational(cls, n: int) -> "PauliList":
        """Generators ``Z_0, ..., Z_{n-1}`` of the all-zero state."""
        return cls(np.eye(n, dtype=np.uint8) * 3, np.zeros(n, dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.letters.shape[1]

    def __len__(self) -> int:
        return self.letters.shape[0]

    def __getitem__(self, j: int) -> ConcretePauli:
        return ConcretePauli(self.letters[j], int(self.prefactors[j]))

    def __iter__(self) -> Iterator[ConcretePauli]:
        return (self[j] for j in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliList):
            return NotImplemented
        return self is other or (
            np.array_equal(self.letters, other.letters)
            and np.array_equal(self.prefactors, other.prefactors)
        )

    def __hash__(self) -> int:
        return hash((self.letters.tobytes(), self.prefactors.tobytes()))

    def __repr__(self) -> str:
        return f"PauliList([{', '.join(str(p) for p in self)}])"

    def commutators(self, p: ConcretePauli) -> np.ndarray:
        """Bit vector whose entry j is ``[self[j], p]``."""
        if p.n != self.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {p.n}")
        return (COMM[self.letters, p.letters].sum(axis=1) & 1).astype(np.uint8)

    def conjugate(self, gate: GateAction, targets: Sequence[int]) -> "PauliList":
        if not isinstance(gate, CliffordTable):
            raise NotCliffordError("conjugation needs a Clifford gate; decompose it instead")
        _check_targets(targets, gate.num_qubits, self.n)
        t = list(targets)
        idx = np.zeros(len(self), dtype=np.int64)
        for c in t:
            idx = 4 * idx + self.letters[:, c]
        letters = self.letters.copy()
        letters[:, t] = gate._letters_arr[idx]
        return PauliList(letters, self.prefactors + gate._phases_arr[idx])

    def replace(self, updates: dict[int, ConcretePauli]) -> "PauliList":
        letters = self.letters.copy()
        prefactors = self.prefactors.copy()
        for j, p in updates.items():
            letters[j] = p.letters
            prefactors[j] = p.prefactor
        return PauliList(letters, prefactors)

    def swap(self, i: int, j: int) -> "PauliList":
        order = np.arange(len(self))
        order[[i, j]] = order[[j, i]]
        return PauliList(self.letters[order], self.prefactors[order])

    def product(self, selection: Sequence[int] | np.ndarray) -> ConcretePauli:
        """Ordered product of the rows ``j`` with ``selection[j] == 1``."""
        out = ConcretePauli.identity(self.n)
        for j in np.flatnonzero(np.asarray(selection)):
            out = multiply(out, self[int(j)])
        return out
