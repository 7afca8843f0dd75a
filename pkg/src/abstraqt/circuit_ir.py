"""Circuits, the built-in gate set, and a small OpenQASM-style text format.

Accepted input::

    OPENQASM 2.0;              // optional header lines
    include "qelib1.inc";
    qreg q[3];
    h q[0];
    rz(pi/4) q[1];
    cx q[0],q[1];
    measure q[2];              // non-selective: both outcomes kept
    project q[0] -> -;         // apply (I - X)/2 on q[0]; outcomes 0, 1, +, -

Exactly one ``qreg`` is allowed and it must come before any gate.
"""
from __future__ import annotations

import ast
import enum
import functools
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli_core import CliffordTable, ConcretePauli, GateAction, classify_gate

EXIT_PARSE = 2
EXIT_UNSUPPORTED = 3
EXIT_SIZE = 4


class CircuitError(Exception):
    """Base class for user-facing circuit problems; ``code`` is the CLI exit status."""

    code = EXIT_PARSE

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class CircuitSyntaxError(CircuitError):
    kind = "syntax"


class QubitIndexError(CircuitError):
    kind = "index"


class UnknownGateError(CircuitError):
    kind = "unknown-gate"
    code = EXIT_UNSUPPORTED


class CircuitSizeError(CircuitError):
    kind = "size"
    code = EXIT_SIZE


class GateKind(enum.Enum):
    UNITARY = "unitary"
    MEASURE = "measure"
    PROJECT = "project"


# name -> (number of qubits, number of angles)
GATE_ARITY = {
    "id": (1, 0), "x": (1, 0), "y": (1, 0), "z": (1, 0), "h": (1, 0),
    "s": (1, 0), "sdg": (1, 0), "t": (1, 0), "tdg": (1, 0),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1),
    "cx": (2, 0), "cz": (2, 0), "swap": (2, 0),
    "ccx": (3, 0),
}
GATE_ALIASES = {"i": "id", "cnot": "cx", "toffoli": "ccx"}
CLIFFORD_NAMES = frozenset({"id", "x", "y", "z", "h", "s", "sdg", "cx", "cz", "swap"})
SELF_INVERSE = frozenset({"id", "x", "y", "z", "h", "cx", "cz", "swap", "ccx"})
ADJOINT_NAME = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}
PROJECT_OUTCOMES = ("0", "1", "+", "-")


@dataclass(frozen=True)
class Gate:
    name: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    kind: GateKind = GateKind.UNITARY
    outcome: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind is GateKind.UNITARY:
            if self.name not in GATE_ARITY:
                raise UnknownGateError(f"unknown gate {self.name!r}")
            nq, npar = GATE_ARITY[self.name]
            if len(self.targets) != nq or len(self.params) != npar:
                raise CircuitSyntaxError(
                    f"gate {self.name} takes {nq} qubit(s) and {npar} angle(s), "
                    f"got {len(self.targets)} and {len(self.params)}"
                )
        elif len(self.targets) != 1:
            raise CircuitSyntaxError(f"{self.kind.value} acts on exactly one qubit")
        if self.kind is GateKind.PROJECT and self.outcome not in PROJECT_OUTCOMES:
            raise CircuitSyntaxError(f"projection outcome must be one of {PROJECT_OUTCOMES}")
        if len(set(self.targets)) != len(self.targets):
            raise QubitIndexError(f"repeated qubit in {self.name} {self.targets}")
        if not all(math.isfinite(p) for p in self.params):
            raise CircuitSyntaxError(f"non-finite angle in {self.name}")

    @classmethod
    def unitary(cls, name: str, *targets: int, params: Sequence[float] = ()) -> "Gate":
        return cls(GATE_ALIASES.get(name, name), tuple(targets), tuple(params))

    @classmethod
    def measure(cls, qubit: int) -> "Gate":
        return cls("measure", (qubit,), kind=GateKind.MEASURE)

    @classmethod
    def project(cls, qubit: int, outcome: str) -> "Gate":
        return cls("project", (qubit,), kind=GateKind.PROJECT, outcome=outcome)

    def is_clifford(self) -> bool:
        return self.kind is GateKind.UNITARY and isinstance(builtin_action(self), CliffordTable)

    def observable(self, n: int) -> ConcretePauli:
        """The Pauli ``R`` whose projection ``(I + R)/2`` this instruction applies (``Z`` for measure)."""
        q = self.targets[0]
        if self.kind is GateKind.MEASURE:
            return ConcretePauli.single(n, q, "Z")
        if self.kind is GateKind.PROJECT:
            letter = "Z" if self.outcome in ("0", "1") else "X"
            sign = 0 if self.outcome in ("0", "+") else 2
            return ConcretePauli.single(n, q, letter, sign)
        raise ValueError("unitary gates have no observable")

    def adjoint(self) -> "Gate":
        if self.kind is not GateKind.UNITARY:
            raise ValueError("measurements have no adjoint")
        if self.name in ("rx", "ry", "rz"):
            return Gate(self.name, self.targets, (-self.params[0],))
        return Gate(ADJOINT_NAME.get(self.name, self.name), self.targets, self.params)

    def __str__(self) -> str:
        return emit_instruction(self)


@dataclass(frozen=True)
class Circuit:
    n: int
    instructions: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.n < 1:
            raise CircuitSyntaxError("a circuit needs at least one qubit")
        for g in self.instructions:
            if any(t < 0 or t >= self.n for t in g.targets):
                raise QubitIndexError(f"{g.name} on {g.targets} out of range for {self.n} qubits")

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("cannot concatenate circuits of different width")
        return Circuit(self.n, self.instructions + other.instructions)

    def has_measurements(self) -> bool:
        return any(g.kind is not GateKind.UNITARY for g in self.instructions)

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.instructions:
            counts[g.name] = counts.get(g.name, 0) + 1
        return counts


# --- gate matrices and classification ------------------------------------------

_SQRT_HALF = 1 / math.sqrt(2)
_FIXED_MATRICES = {
    "id": np.eye(2),
    "x": np.array([[0, 1], [1, 0]]),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.diag([1, -1]),
    "h": np.array([[1, 1], [1, -1]]) * _SQRT_HALF,
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "cz": np.diag([1, 1, 1, -1]),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}
_ccx = np.eye(8)
_ccx[[6, 7]] = _ccx[[7, 6]]
_FIXED_MATRICES["ccx"] = _ccx

SNAP_ATOL = 1e-12


def snap_angle(theta: float) -> float:
    """Replace angles within 1e-12 of a multiple of pi/2 by that exact multiple."""
    k = round(theta / (math.pi / 2))
    return k * (math.pi / 2) if abs(theta - k * (math.pi / 2)) <= SNAP_ATOL else theta


def gate_matrix(name: str, params: Sequence[float] = ()) -> np.ndarray:
    """Dense unitary of a built-in gate; the first target is the leftmost factor."""
    name = GATE_ALIASES.get(name, name)
    if name in _FIXED_MATRICES:
        return np.asarray(_FIXED_MATRICES[name], dtype=complex)
    if name not in GATE_ARITY:
        raise UnknownGateError(f"unknown gate {name!r}")
    theta = params[0]
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if name == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if name == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


@functools.lru_cache(maxsize=1024)
def _action(name: str, params: tuple[float, ...]) -> GateAction:
    if name in ("rx", "ry", "rz"):
        params = (snap_angle(params[0]),)
    return classify_gate(gate_matrix(name, params))


def builtin_action(g: Gate) -> GateAction:
    """Clifford table or Pauli-sum decomposition of a unitary instruction (cached per name and angles)."""
    if g.kind is not GateKind.UNITARY:
        raise ValueError("measurements have no gate action")
    return _action(g.name, g.params)


def inverse(c: Circuit) -> Circuit:
    if c.has_measurements():
        raise ValueError("cannot invert a circuit containing measurements")
    return Circuit(c.n, tuple(g.adjoint() for g in reversed(c.instructions)))


# --- text format ---------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval_angle(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_angle(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_angle(node.left), _eval_angle(node.right))
    raise ValueError("unsupported angle expression")


def parse_angle(text: str) -> float:
    try:
        value = _eval_angle(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise CircuitSyntaxError(f"bad angle {text.strip()!r}: {exc}") from None
    if not math.isfinite(value):
        raise CircuitSyntaxError(f"non-finite angle {text.strip()!r}")
    return value


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_QUBIT = rf"({_IDENT})\s*\[\s*(\d+)\s*\]"
_RE_QREG = re.compile(rf"qreg\s+({_IDENT})\s*\[\s*(\d+)\s*\]$")
_RE_MEASURE = re.compile(rf"measure\s+{_QUBIT}$")
_RE_PROJECT = re.compile(rf"project\s+{_QUBIT}\s*->\s*([01+-])$")
_RE_GATE = re.compile(rf"({_IDENT})\s*(?:\((.*)\))?\s+(.+)$", re.S)
_RE_ARG = re.compile(rf"\s*{_QUBIT}\s*$")
_RE_HEADER = re.compile(r'(OPENQASM\s+\d+(\.\d+)?|include\s+"[^"]*")$')


def _statements(text: str):
    """Yield ``(statement, line, column)`` with comments removed."""
    clean = re.sub(r"//[^\n]*", lambda m: " " * len(m.group()), text)
    start = 0
    for m in re.finditer(";", clean):
        yield from _located(clean, start, m.start())
        start = m.end()
    tail = clean[start:]
    if tail.strip():
        _, line, col = next(_located(clean, start, len(clean)))
        raise CircuitSyntaxError("missing ';' at end of statement", line, col)


def _located(clean: str, start: int, end: int):
    chunk = clean[start:end]
    stripped = chunk.strip()
    if not stripped:
        return
    offset = start + (len(chunk) - len(chunk.lstrip()))
    line = clean.count("\n", 0, offset) + 1
    col = offset - (clean.rfind("\n", 0, offset) + 1) + 1
    yield " ".join(stripped.split()) if "\n" in stripped else stripped, line, col


def parse(text: str) -> Circuit:
    reg: str | None = None
    n = 0
    gates: list[Gate] = []

    def qubit(name: str, idx: str, line: int, col: int) -> int:
        if reg is None:
            raise CircuitSyntaxError("qubit used before 'qreg' declaration", line, col)
        if name != reg:
            raise CircuitSyntaxError(f"unknown register {name!r}", line, col)
        i = int(idx)
        if i >= n:
            raise QubitIndexError(f"qubit index {i} out of range for {reg}[{n}]", line, col)
        return i

    for stmt, line, col in _statements(text):
        if _RE_HEADER.match(stmt):
            continue
        m = _RE_QREG.match(stmt)
        if m:
            if reg is not None:
                raise CircuitSyntaxError("only one qreg is supported", line, col)
            reg, n = m.group(1), int(m.group(2))
            if n < 1:
                raise CircuitSyntaxError("qreg needs at least one qubit", line, col)
            continue
        m = _RE_MEASURE.match(stmt)
        if m:
            gates.append(Gate.measure(qubit(m.group(1), m.group(2), line, col)))
            continue
        m = _RE_PROJECT.match(stmt)
        if m:
            gates.append(Gate.project(qubit(m.group(1), m.group(2), line, col), m.group(3)))
            continue
        m = _RE_GATE.match(stmt)
        if not m or m.group(1) in ("measure", "project", "qreg"):
            raise CircuitSyntaxError(f"cannot parse statement {stmt!r}", line, col)
        name = GATE_ALIASES.get(m.group(1), m.group(1))
        if name not in GATE_ARITY:
            raise UnknownGateError(f"unknown gate {m.group(1)!r}", line, col)
        try:
            params = tuple(parse_angle(p) for p in m.group(2).split(",")) if m.group(2) is not None else ()
        except CircuitError as exc:
            raise type(exc)(exc.message, line, col) from None
        targets = []
        for arg in m.group(3).split(","):
            am = _RE_ARG.match(arg)
            if not am:
                raise CircuitSyntaxError(f"bad qubit argument {arg.strip()!r}", line, col)
            targets.append(qubit(am.group(1), am.group(2), line, col))
        try:
            gates.append(Gate(name, tuple(targets), params))
        except CircuitError as exc:
            raise type(exc)(exc.message, line, col) from None
    if reg is None:
        raise CircuitSyntaxError("missing 'qreg' declaration")
    return Circuit(n, tuple(gates))


def emit_instruction(g: Gate, reg: str = "q") -> str:
    if g.kind is GateKind.MEASURE:
        return f"measure {reg}[{g.targets[0]}];"
    if g.kind is GateKind.PROJECT:
        return f"project {reg}[{g.targets[0]}] -> {g.outcome};"
    params = "(" + ",".join(repr(p) for p in g.params) + ")" if g.params else ""
    args = ",".join(f"{reg}[{t}]" for t in g.targets)
    return f"{g.name}{params} {args};"


def emit(c: Circuit, reg: str = "q") -> str:
    """Canonical text form; :func:`parse` reads it back to an equal circuit."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg {reg}[{c.n}];"]
    lines.extend(emit_instruction(g, reg) for g in c.instructions)
    return "\n".join(lines) + "\n"


def from_instructions(n: int, items: Iterable[tuple]) -> Circuit:
    """Build a circuit from ``(name, *targets)`` tuples; angles go in a trailing tuple."""
    gates = []
    for item in items:
        name, *rest = item
        params: Sequence[float] = ()
        if rest and isinstance(rest[-1], tuple):
            params = rest.pop()
        gates.append(Gate.unitary(name, *rest, params=params))
    return Circuit(n, tuple(gates))
