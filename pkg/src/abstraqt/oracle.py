"""Exact reference simulators used for differential testing.

``DenseState`` is a plain density matrix. ``ConcreteSumState`` is the
exponential-sum stabilizer representation ``sum_i c_i P_i prod_j (I + (-1)^b_ij Q_j)/2``
with concrete terms; it shares all Pauli algebra with the abstract simulator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .abstract_state import f_concrete
from .circuit_ir import Circuit, CircuitSizeError, Gate, GateKind, builtin_action, gate_matrix
from .pauli_core import (
    CliffordTable,
    ConcretePauli,
    PauliList,
    PauliSumDecomposition,
    commutator,
    conjugate_concrete,
    dense,
    embed_letters,
)

MAX_DENSE_ORACLE_QUBITS = 10
TERM_CAP = 4096
_I_POWERS = (1, 1j, -1, -1j)


# --- dense density matrices ---------------------------------------------------


def _check_dense_size(n: int) -> None:
    if n > MAX_DENSE_ORACLE_QUBITS:
        raise CircuitSizeError(f"dense oracle limited to {MAX_DENSE_ORACLE_QUBITS} qubits, got {n}")


def _apply_left(rho: np.ndarray, op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """``op`` (acting on ``targets``) times ``rho``."""
    k = len(targets)
    t = rho.reshape((2,) * n + (-1,))
    t = np.tensordot(op.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot puts the new target axes first; move them back
    t = np.moveaxis(t, list(range(k)), list(targets))
    return t.reshape(rho.shape)


def _apply_both(rho: np.ndarray, op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """``op rho op^dag``."""
    left = _apply_left(rho, op, targets, n)
    return _apply_left(left.conj().T, op, targets, n).conj().T


@dataclass
class DenseState:
    rho: np.ndarray

    @classmethod
    def init(cls, n: int) -> "DenseState":
        _check_dense_size(n)
        rho = np.zeros((2**n, 2**n), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)

    @property
    def n(self) -> int:
        return self.rho.shape[0].bit_length() - 1

    def apply(self, unitary: np.ndarray, targets: Sequence[int]) -> "DenseState":
        return DenseState(_apply_both(self.rho, np.asarray(unitary, dtype=complex), targets, self.n))

    def _pauli_left(self, r: ConcretePauli, rho: np.ndarray) -> np.ndarray:
        support = [int(q) for q in np.flatnonzero(r.letters)]
        if not support:
            return _I_POWERS[r.prefactor] * rho
        local = dense(ConcretePauli(r.letters[support], r.prefactor))
        return _apply_left(rho, local, support, self.n)

    def project(self, r: ConcretePauli) -> "DenseState":
        """``M rho M`` with ``M = (I + R)/2``."""
        rho = self.rho
        left = rho + self._pauli_left(r, rho)
        out = left + self._pauli_left(r, left.conj().T).conj().T
        return DenseState(out / 4)

    def measure(self, r: ConcretePauli) -> "DenseState":
        return DenseState(self.project(r).rho + self.project(-r).rho)

    def trace(self) -> float:
        return float(np.trace(self.rho).real)


def dense_apply(state: DenseState, unitary: np.ndarray, targets: Sequence[int]) -> DenseState:
    return state.apply(unitary, targets)


def dense_project(state: DenseState, r: ConcretePauli) -> DenseState:
    return state.project(r)


def dense_trace(state: DenseState) -> float:
    return state.trace()


def projector_density(q: PauliList, b: Sequence[int]) -> np.ndarray:
    """``prod_j (I + (-1)^b_j Q_j) / 2`` as a dense matrix."""
    d = 2**q.n
    out = np.eye(d, dtype=complex)
    for j, qj in enumerate(q):
        out = out @ (np.eye(d) + (-1) ** int(b[j]) * dense(qj)) / 2
    return out


# --- exponential sums -----------------------------------------------------------


@dataclass
class SumTerm:
    c: complex
    pauli: ConcretePauli
    b: np.ndarray

    def key(self) -> tuple:
        return (self.pauli.letters.tobytes(), self.b.tobytes())


@dataclass
class ConcreteSumState:
    """Concrete exponential-sum state; ``merge`` folds terms with equal bare ``P`` and ``b``."""

    terms: list[SumTerm]
    stabilizers: PauliList
    merge: bool = False
    cap: int = TERM_CAP
    max_terms_seen: int = field(default=1)

    @classmethod
    def init(cls, n: int, merge: bool = False, cap: int = TERM_CAP) -> "ConcreteSumState":
        term = SumTerm(1.0 + 0j, ConcretePauli.identity(n), np.zeros(n, dtype=np.uint8))
        return cls([term], PauliList.computational(n), merge, cap)

    @property
    def n(self) -> int:
        return self.stabilizers.n

    def _with_terms(self, terms: list[SumTerm], stabilizers: PauliList | None = None) -> "ConcreteSumState":
        if self.merge:
            merged: dict[tuple, SumTerm] = {}
            for t in terms:
                bare = SumTerm(t.c * _I_POWERS[t.pauli.prefactor], t.pauli.bare(), t.b)
                k = bare.key()
                if k in merged:
                    merged[k].c += bare.c
                else:
                    merged[k] = bare
            terms = [t for t in merged.values() if t.c != 0]
        if len(terms) > self.cap:
            raise CircuitSizeError(f"sum oracle exceeded {self.cap} terms")
        q = self.stabilizers if stabilizers is None else stabilizers
        out = ConcreteSumState(terms, q, self.merge, self.cap, max(self.max_terms_seen, len(terms)))
        return out

    def apply_clifford(self, gate: CliffordTable, targets: Sequence[int]) -> "ConcreteSumState":
        terms = [SumTerm(t.c, conjugate_concrete(gate, targets, t.pauli), t.b) for t in self.terms]
        return self._with_terms(terms, self.stabilizers.conjugate(gate, targets))

    def apply_decomposed(self, dec: PauliSumDecomposition, targets: Sequence[int]) -> "ConcreteSumState":
        if len(self.terms) * len(dec) ** 2 > self.cap * 16:
            raise CircuitSizeError(f"sum oracle would exceed {self.cap} terms")
        rs = [embed_letters(letters, targets, self.n) for _, letters in dec.terms]
        flips = [self.stabilizers.commutators(r) for r in rs]
        terms = []
        for t in self.terms:
            for q, (d_q, _) in enumerate(dec.terms):
                pr = t.pauli * rs[q]
                b = t.b ^ flips[q]
                for p, (d_p, _) in enumerate(dec.terms):
                    terms.append(SumTerm(d_p * t.c * np.conj(d_q), rs[p] * pr, b))
        return self._with_terms(terms)

    def apply(self, action, targets: Sequence[int]) -> "ConcreteSumState":
        if isinstance(action, CliffordTable):
            return self.apply_clifford(action, targets)
        return self.apply_decomposed(action, targets)

    def project(self, r: ConcretePauli) -> "ConcreteSumState":
        q = self.stabilizers
        anti = np.flatnonzero(q.commutators(r))
        if anti.size == 0:
            kept = [
                t for t in self.terms
                if f_concrete(r, q, t.b) == 0 and commutator(r, t.pauli) == 0
            ]
            return self._with_terms(kept)
        first = int(anti[0])
        if first != 0:
            q = q.swap(0, first)
        q1 = q[0]
        updates = {int(j): q1 * q[int(j)] for j in anti[1:]}
        q = q.replace(updates).replace({0: r.bare()})
        terms = []
        for t in self.terms:
            b = t.b.copy()
            if first != 0:
                b[[0, first]] = b[[first, 0]]
            b1 = int(b[0])
            for j in anti[1:]:
                b[int(j)] ^= b1
            p = t.pauli
            if commutator(r, p):
                p = p * q1
                if b1:
                    p = -p
            b[0] = 1 if r.prefactor == 2 else 0
            terms.append(SumTerm(t.c / 2, p, b))
        return self._with_terms(terms, q)

    def measure(self, r: ConcretePauli) -> "ConcreteSumState":
        plus, minus = self.project(r), self.project(-r)
        if plus.stabilizers != minus.stabilizers:
            raise AssertionError("both outcomes must share stabilizers")
        return self._with_terms(plus.terms + minus.terms, plus.stabilizers)

    def trace(self) -> float:
        total = 0.0
        for t in self.terms:
            f = f_concrete(t.pauli, self.stabilizers, t.b)
            if f is not None:
                total += (t.c * _I_POWERS[f]).real
        return total

    def to_dense(self) -> np.ndarray:
        _check_dense_size(self.n)
        d = 2**self.n
        out = np.zeros((d, d), dtype=complex)
        projectors: dict[bytes, np.ndarray] = {}
        for t in self.terms:
            key = t.b.tobytes()
            if key not in projectors:
                projectors[key] = projector_density(self.stabilizers, t.b)
            out += t.c * dense(t.pauli) @ projectors[key]
        return out


def sum_apply(s: ConcreteSumState, action, targets: Sequence[int]) -> ConcreteSumState:
    return s.apply(action, targets)


def sum_measure(s: ConcreteSumState, r: ConcretePauli) -> ConcreteSumState:
    return s.measure(r)


def sum_project(s: ConcreteSumState, r: ConcretePauli) -> ConcreteSumState:
    return s.project(r)


def sum_trace(s: ConcreteSumState) -> float:
    return s.trace()


# --- whole-circuit drivers -----------------------------------------------------------


def step(state, g: Gate, n: int):
    """Advance either oracle state by one instruction."""
    if g.kind is GateKind.UNITARY:
        if isinstance(state, DenseState):
            return state.apply(gate_matrix(g.name, g.params), g.targets)
        return state.apply(builtin_action(g), g.targets)
    r = g.observable(n)
    return state.measure(r) if g.kind is GateKind.MEASURE else state.project(r)


def run_dense(c: Circuit) -> DenseState:
    state = DenseState.init(c.n)
    for g in c:
        state = step(state, g, c.n)
    return state


def run_sum(c: Circuit, merge: bool = True, cap: int = TERM_CAP) -> ConcreteSumState:
    state = ConcreteSumState.init(c.n, merge=merge, cap=cap)
    for g in c:
        state = step(state, g, c.n)
    return state


def prob_one(state, qubit: int) -> float:
    """Weight of outcome 1 on ``qubit`` (no renormalization)."""
    r = ConcretePauli.single(state.n, qubit, "Z", prefactor=2)
    return state.project(r).trace()
