"""Abstract density matrices ``r * c * P * prod_j (I + (-1)^b_j Q_j) / 2`` and their transformers.

``r`` counts how many concrete summands one abstract summand stands for, ``c``
is an :class:`AbstractComplex`, ``P`` an :class:`AbstractPauli`, the ``b_j``
abstract booleans and the stabilizer generators ``Q_j`` stay concrete. Every
transformer is a pure function from state to state.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .abstract_domains import (
    BOOL_ADD,
    BOOL_MUL,
    DOUBLE_BOOL,
    ONE,
    ZERO,
    AbstractBool,
    AbstractComplex,
    AbstractZ4,
    Interval,
    acomplex_re,
    i_pow,
    z4_sum_codes,
)
from .abstract_pauli import (
    LS_COMM,
    AbstractPauli,
    apauli_commutator,
    apauli_conjugate,
    apauli_join,
    apauli_mul,
    apauli_sign_flip,
    lift,
)
from .circuit_ir import Circuit, Gate, GateKind, builtin_action
from .f2_linalg import BottomError, encode_pauli, solve, solve_abstract_rhs, stabilizer_matrix
from .pauli_core import (
    CliffordTable,
    ConcretePauli,
    NotCliffordError,
    PauliList,
    PauliSumDecomposition,
    embed_letters,
)

LN2 = math.log(2.0)


class InvariantError(RuntimeError):
    """A state violated a structural invariant (a bug, not a user error)."""


@dataclass(frozen=True, eq=False)
class AbstractDensityMatrix:
    r: int
    coeff: AbstractComplex
    pauli: AbstractPauli
    signs: np.ndarray = field(repr=False)
    stabilizers: PauliList = field(repr=False)

    def __post_init__(self):
        signs = np.array(self.signs, dtype=np.uint8).reshape(-1)
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "r", int(self.r))

    @property
    def n(self) -> int:
        return self.pauli.n

    def is_zero(self) -> bool:
        return self.coeff.is_zero() or self.r == 0

    def sign(self, j: int) -> AbstractBool:
        return AbstractBool(int(self.signs[j]))

    def replace(self, **changes) -> "AbstractDensityMatrix":
        fields = dict(r=self.r, coeff=self.coeff, pauli=self.pauli, signs=self.signs, stabilizers=self.stabilizers)
        fields.update(changes)
        return AbstractDensityMatrix(**fields)

    def same_structure(self, other: "AbstractDensityMatrix") -> bool:
        """Equal ``P`` and ``b``, so the two summands can be merged without loss."""
        return self.pauli == other.pauli and np.array_equal(self.signs, other.signs)

    def check_invariants(self) -> None:
        q = self.stabilizers
        if len(q) != self.n or q.n != self.n or self.signs.size != self.n:
            raise InvariantError("stabilizer list does not match qubit count")
        if (q.prefactors % 2).any():
            raise InvariantError("stabilizer with imaginary prefactor")
        for j in range(len(q)):
            if q.commutators(q[j]).any():
                raise InvariantError(f"stabilizer {j} anticommutes with another generator")

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        gens = ", ".join(f"(-1)^{self.sign(j)!r} {q}" for j, q in enumerate(self.stabilizers))
        return f"{self.r} * {self.coeff!r} * {self.pauli} * [{gens}]"


def init(n: int) -> AbstractDensityMatrix:
    """The all-zero state."""
    if n < 1:
        raise ValueError("need at least one qubit")
    return AbstractDensityMatrix(
        1, ONE, AbstractPauli.identity(n), np.full(n, 0b01, dtype=np.uint8), PauliList.computational(n)
    )


def zero_like(state: AbstractDensityMatrix) -> AbstractDensityMatrix:
    return state.replace(r=0, coeff=ZERO)


def apply_clifford(state: AbstractDensityMatrix, gate: CliffordTable, targets: Sequence[int]) -> AbstractDensityMatrix:
    if not isinstance(gate, CliffordTable):
        raise NotCliffordError("apply_clifford needs a Clifford gate")
    return state.replace(
        pauli=apauli_conjugate(gate, targets, state.pauli),
        stabilizers=state.stabilizers.conjugate(gate, targets),
    )


def expand_decomposed(
    state: AbstractDensityMatrix, dec: PauliSumDecomposition, targets: Sequence[int]
) -> list[AbstractDensityMatrix]:
    """The ``|terms|^2`` summands of ``U rho U^dag`` before merging."""
    if len(dec) == 0:
        raise ValueError("empty decomposition")
    n = state.n
    paulis = [embed_letters(letters, targets, n) for _, letters in dec.terms]
    lifted = [lift(p) for p in paulis]
    out = []
    for q, (d_q, _) in enumerate(dec.terms):
        comm = state.stabilizers.commutators(paulis[q])
        signs = BOOL_ADD[state.signs, np.uint8(1) << comm]
        right = apauli_mul(state.pauli, lifted[q])
        for p, (d_p, _) in enumerate(dec.terms):
            coeff = AbstractComplex.from_complex(d_p * d_q.conjugate()) * state.coeff
            out.append(
                AbstractDensityMatrix(state.r, coeff, apauli_mul(lifted[p], right), signs, state.stabilizers)
            )
    return out


def compress(summands: Sequence[AbstractDensityMatrix]) -> AbstractDensityMatrix:
    """Merge summands sharing their stabilizers into one; zero summands drop out."""
    if not summands:
        raise ValueError("nothing to compress")
    q = summands[0].stabilizers
    for s in summands[1:]:
        if s.stabilizers != q:
            raise ValueError("cannot compress summands with different stabilizers")
    live = [s for s in summands if not s.is_zero()]
    if not live:
        return zero_like(summands[0])
    head = live[0]
    r, coeff, pauli, signs = head.r, head.coeff, head.pauli, head.signs.copy()
    for s in live[1:]:
        r += s.r
        coeff = coeff | s.coeff
        pauli = apauli_join(pauli, s.pauli)
        signs |= s.signs
    return AbstractDensityMatrix(r, coeff, pauli, signs, q)


def apply_decomposed(
    state: AbstractDensityMatrix, dec: PauliSumDecomposition, targets: Sequence[int]
) -> AbstractDensityMatrix:
    if state.is_zero():
        return state
    return compress(expand_decomposed(state, dec, targets))


def apply_gate(state: AbstractDensityMatrix, action, targets: Sequence[int]) -> AbstractDensityMatrix:
    if isinstance(action, CliffordTable):
        return apply_clifford(state, action, targets)
    return apply_decomposed(state, action, targets)


# --- the F function ------------------------------------------------------------


@dataclass(frozen=True)
class FResult:
    """A subset of ``Z4 + {undefined}``; ``undefined`` plays the role of "no product exists"."""

    residues: AbstractZ4
    undefined: bool = False

    def members(self) -> frozenset:
        out: set = set(self.residues.members())
        if self.undefined:
            out.add(None)
        return frozenset(out)

    def is_bottom(self) -> bool:
        return self.residues.is_bottom() and not self.undefined

    def implies(self) -> bool:
        """Every concretization lies in the signed stabilizer group."""
        return self.residues.bits == 0b0001 and not self.undefined

    def refutes(self) -> bool:
        """No concretization lies in the signed stabilizer group."""
        return 0 not in self.residues

    def __repr__(self) -> str:
        parts = [str(v) for v in self.residues.members()] + (["undef"] if self.undefined else [])
        return "{" + ",".join(parts) + "}"


UNDEFINED = FResult(AbstractZ4(0), True)


@functools.lru_cache(maxsize=256)
def _phi(q: PauliList):
    return stabilizer_matrix(q)


def _check_dims(n: int, q: PauliList, signs) -> None:
    if q.n != n or len(signs) != len(q):
        raise ValueError("dimension mismatch between Pauli, stabilizers and signs")


def f_concrete(r: ConcretePauli, q: PauliList, b: Sequence[int]) -> int | None:
    """Residue ``v`` with ``prod_j ((-1)^b_j Q_j)^x_j = i^-v R``, or ``None`` when no such product exists."""
    _check_dims(r.n, q, b)
    if q.commutators(r).any():
        return None
    sol = solve(_phi(q), encode_pauli(r))
    if not sol.solved:
        return None
    x = sol.particular
    prod = q.product(x)
    return (r.prefactor - prod.prefactor - 2 * int(np.dot(x, np.asarray(b, dtype=np.int64)))) % 4


def _sign_terms(x_codes: np.ndarray, signs: np.ndarray) -> int:
    """Z4 code of ``sum_j 2 * x_j * b_j`` for abstract booleans ``x`` and ``b``."""
    prods = BOOL_MUL[x_codes, signs]
    return z4_sum_codes(DOUBLE_BOOL[prods].tolist())


def f_abstract_b(r: ConcretePauli, q: PauliList, signs: Sequence[int]) -> FResult:
    """F for a concrete ``R`` and abstract sign codes."""
    signs = np.asarray(signs, dtype=np.uint8)
    _check_dims(r.n, q, signs)
    if q.commutators(r).any():
        return UNDEFINED
    sol = solve(_phi(q), encode_pauli(r))
    if not sol.solved:
        return UNDEFINED
    if sol.null_basis:
        return f_abstract(lift(r), q, signs)
    x = sol.particular
    prod = q.product(x)
    base = AbstractZ4.of(r.prefactor - prod.prefactor)
    x_codes = np.where(x == 1, 0b10, 0b01).astype(np.uint8)
    return FResult(base - AbstractZ4(_sign_terms(x_codes, signs)))


def _stabilizer_commutators(p: AbstractPauli, q: PauliList) -> np.ndarray:
    """Abstract-boolean code of ``[p, Q_j]`` for every ``j``."""
    per_qubit = LS_COMM[p.letter_sets[None, :], np.uint8(1) << q.letters]
    bad = (per_qubit == 0).any(axis=1)
    ones = (per_qubit == 0b10).sum(axis=1) & 1
    both = (per_qubit == 0b11).any(axis=1)
    codes = np.where(both, 0b11, np.where(ones == 1, 0b10, 0b01)).astype(np.uint8)
    codes[bad] = 0
    return codes


def f_abstract(p: AbstractPauli, q: PauliList, signs: Sequence[int]) -> FResult:
    """F for an abstract ``R`` and abstract sign codes."""
    signs = np.asarray(signs, dtype=np.uint8)
    _check_dims(p.n, q, signs)
    if p.is_bottom() or (signs == 0).any():
        return FResult(AbstractZ4(0))
    comm = _stabilizer_commutators(p, q)
    if (comm == 0b10).any():
        return UNDEFINED
    undefined = bool((comm == 0b11).any())
    try:
        sol = solve_abstract_rhs(_phi(q), encode_pauli(p))
    except BottomError:
        return FResult(AbstractZ4(0))
    if not sol.solved:
        return UNDEFINED
    free = np.zeros(len(q), dtype=bool)
    for u in sol.null_basis:
        free |= u.astype(bool)
    definite = np.flatnonzero((sol.particular == 1) & ~free)
    prod = lift(q.product(np.isin(np.arange(len(q)), definite).astype(np.uint8)))
    for j in np.flatnonzero(free):
        qj = q[int(j)]
        maybe = AbstractPauli((1 << qj.prefactor) | 0b0001, (np.uint8(1) << qj.letters) | np.uint8(1))
        prod = apauli_mul(prod, maybe)
    x_codes = np.where(free, 0b11, np.where(sol.particular == 1, 0b10, 0b01)).astype(np.uint8)
    residues = p.pref - prod.pref - AbstractZ4(_sign_terms(x_codes, signs))
    return FResult(residues, undefined)


# --- measurement -----------------------------------------------------------------


def _check_observable(r: ConcretePauli, n: int) -> None:
    if r.n != n:
        raise ValueError(f"observable on {r.n} qubits, state has {n}")
    if not r.is_hermitian():
        raise ValueError("measurement Pauli must have a real prefactor (+1 or -1)")


def measure_project(state: AbstractDensityMatrix, r: ConcretePauli) -> AbstractDensityMatrix:
    """Apply the projection ``(I + R) / 2`` on both sides (no renormalization)."""
    _check_observable(r, state.n)
    if state.is_zero():
        return state
    q = state.stabilizers
    anti = np.flatnonzero(q.commutators(r))
    comm_p = apauli_commutator(lift(r), state.pauli)

    if anti.size == 0:
        f = f_abstract_b(r, q, state.signs)
        if f.refutes() or comm_p.bits == 0b10:
            return zero_like(state)
        if f.implies() and comm_p.bits == 0b01:
            return state
        return state.replace(coeff=state.coeff | ZERO)

    # bring one anticommuting generator to slot 0 and fold it into the others
    first = int(anti[0])
    signs = state.signs.copy()
    if first != 0:
        q = q.swap(0, first)
        signs[[0, first]] = signs[[first, 0]]
    q1 = q[0]
    b1 = int(signs[0])
    # the other anticommuting generators keep their indices after the swap
    updates = {}
    for j in anti[1:]:
        j = int(j)
        updates[j] = q1 * q[j]
        signs[j] = BOOL_ADD[signs[j], b1]
    if updates:
        q = q.replace(updates)

    flipped = apauli_sign_flip(b1, apauli_mul(state.pauli, lift(q1)))
    if comm_p.bits == 0b01:
        pauli = state.pauli
    elif comm_p.bits == 0b10:
        pauli = flipped
    else:
        pauli = apauli_join(state.pauli, flipped)
    signs[0] = 0b10 if r.prefactor == 2 else 0b01
    q = q.replace({0: r.bare()})
    return AbstractDensityMatrix(state.r, state.coeff.scale_log(-LN2), pauli, signs, q)


def measure_both(state: AbstractDensityMatrix, r: ConcretePauli) -> AbstractDensityMatrix:
    """Non-selective measurement: both projections summed into one abstract summand."""
    plus = measure_project(state, r)
    minus = measure_project(state, -r)
    if plus.is_zero():
        return minus
    if minus.is_zero():
        return plus
    return compress([plus, minus])


def trace(state: AbstractDensityMatrix) -> Interval:
    if state.is_zero():
        return Interval(0.0, 0.0)
    f = f_abstract(state.pauli, state.stabilizers, state.signs)
    coeff = state.coeff.scale_log(math.log(state.r)) if state.r != 1 else state.coeff
    return acomplex_re(coeff * i_pow(f.residues, f.undefined))


# --- simulation driver -------------------------------------------------------------


def _merge_identical(summands: Iterable[AbstractDensityMatrix]) -> list[AbstractDensityMatrix]:
    merged: list[AbstractDensityMatrix] = []
    for s in summands:
        if s.is_zero():
            continue
        for i, m in enumerate(merged):
            if m.same_structure(s):
                merged[i] = compress([m, s])
                break
        else:
            merged.append(s)
    return merged


@dataclass
class SimulationStats:
    clifford_gates: int = 0
    decomposed_gates: int = 0
    measurements: int = 0
    projections: int = 0
    max_summands_seen: int = 1


class AbstractSimulator:
    """Runs a circuit on a bounded list of abstract summands sharing their stabilizers.

    With ``max_summands=1`` (the default) every decomposition is merged into a
    single summand right away. Larger values first merge summands with equal
    ``P`` and ``b`` and then fold any overflow into the last slot.
    """

    def __init__(self, n: int, max_summands: int = 1, check: bool = False):
        if max_summands < 1:
            raise ValueError("max_summands must be at least 1")
        self.n = n
        self.max_summands = max_summands
        self.check = check
        self.summands: list[AbstractDensityMatrix] = [init(n)]
        self.stats = SimulationStats()

    @property
    def stabilizers(self) -> PauliList:
        return self.summands[0].stabilizers

    @property
    def r(self) -> int:
        return sum(s.r for s in self.summands if not s.is_zero())

    def _settle(self, summands: list[AbstractDensityMatrix]) -> None:
        live = _merge_identical(summands)
        if len(live) > self.max_summands:
            k = self.max_summands - 1
            live = live[:k] + [compress(live[k:])]
        if not live:
            live = [zero_like(summands[0])]
        self.summands = live
        self.stats.max_summands_seen = max(self.stats.max_summands_seen, len(live))
        if self.check:
            for s in live:
                s.check_invariants()

    def apply(self, action, targets: Sequence[int]) -> None:
        if isinstance(action, CliffordTable):
            self.stats.clifford_gates += 1
            self.summands = [apply_clifford(s, action, targets) for s in self.summands]
            if self.check:
                for s in self.summands:
                    s.check_invariants()
            return
        self.stats.decomposed_gates += 1
        expanded = []
        for s in self.summands:
            if not s.is_zero():
                expanded.extend(expand_decomposed(s, action, targets))
        if self.max_summands == 1:
            self._settle([compress(expanded)] if expanded else self.summands)
        else:
            self._settle(expanded or self.summands)

    def project(self, r: ConcretePauli) -> None:
        self.stats.projections += 1
        self._settle([measure_project(s, r) for s in self.summands])

    def measure(self, r: ConcretePauli) -> None:
        self.stats.measurements += 1
        out = []
        for s in self.summands:
            out.append(measure_project(s, r))
            out.append(measure_project(s, -r))
        if self.max_summands == 1:
            self._settle([compress(out)])
        else:
            self._settle(out)

    def step(self, g: Gate) -> None:
        if g.kind is GateKind.UNITARY:
            self.apply(builtin_action(g), g.targets)
        elif g.kind is GateKind.MEASURE:
            self.measure(g.observable(self.n))
        else:
            self.project(g.observable(self.n))

    def run(self, circuit: Circuit) -> "AbstractSimulator":
        if circuit.n != self.n:
            raise ValueError(f"circuit has {circuit.n} qubits, simulator {self.n}")
        for g in circuit:
            self.step(g)
        return self

    def trace(self) -> Interval:
        total = Interval(0.0, 0.0)
        for s in self.summands:
            total = total + trace(s)
        return total

    def projected_trace(self, r: ConcretePauli) -> Interval:
        """Trace after projecting onto ``(I + R) / 2``, leaving the simulator untouched."""
        total = Interval(0.0, 0.0)
        for s in self.summands:
            total = total + trace(measure_project(s, r))
        return total

    def probability_one(self, qubit: int) -> Interval:
        return self.projected_trace(ConcretePauli.single(self.n, qubit, "Z", prefactor=2))
