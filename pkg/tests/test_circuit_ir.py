import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abstraqt.bench_gen import SplitMix64, random_circuit
from abstraqt.circuit_ir import (
    Circuit,
    CircuitSizeError,
    CircuitSyntaxError,
    Gate,
    GateKind,
    QubitIndexError,
    UnknownGateError,
    builtin_action,
    emit,
    from_instructions,
    gate_matrix,
    inverse,
    parse,
    parse_angle,
    snap_angle,
)
from abstraqt.pauli_core import CliffordTable, ConcretePauli, PauliSumDecomposition


def full_unitary(c: Circuit) -> np.ndarray:
    """Dense circuit unitary, built by reshaping into per-qubit axes."""
    n = c.n
    u = np.eye(2**n, dtype=complex).reshape((2,) * (2 * n))
    for g in c:
        k = len(g.targets)
        op = gate_matrix(g.name, g.params).reshape((2,) * (2 * k))
        u = np.tensordot(op, u, axes=(list(range(k, 2 * k)), list(g.targets)))
        u = np.moveaxis(u, list(range(k)), list(g.targets))
    return u.reshape(2**n, 2**n)


GOLDEN_TEXT = "qreg q[2]; h q[0]; h q[1]; t q[0]; cx q[0],q[1]; cx q[0],q[1];"


# ---------------------------------------------------------------- gates


def test_builtin_actions():
    assert len(builtin_action(Gate("t", (0,)))) == 2
    assert len(builtin_action(Gate("ccx", (0, 1, 2)))) == 8
    for name in ("id", "x", "y", "z", "h", "s", "sdg"):
        assert isinstance(builtin_action(Gate(name, (0,))), CliffordTable)
    for name in ("cx", "cz", "swap"):
        assert isinstance(builtin_action(Gate(name, (0, 1))), CliffordTable)
    for g in (Gate("tdg", (0,)), Gate("rx", (0,), (math.pi / 4,)), Gate("ry", (0,), (0.1,)), Gate("rz", (0,), (2.0,))):
        assert isinstance(builtin_action(g), PauliSumDecomposition)


def test_rz_snapping():
    rz = builtin_action(Gate("rz", (0,), (math.pi / 2,)))
    assert isinstance(rz, CliffordTable)
    assert rz == builtin_action(Gate("s", (0,)))
    near = builtin_action(Gate("rz", (0,), (math.pi / 2 + 1e-13,)))
    assert near == rz
    for theta in (0.0, math.pi, -math.pi / 2, 2 * math.pi):
        assert isinstance(builtin_action(Gate("rz", (0,), (theta,))), CliffordTable)
    assert snap_angle(1e-3) == 1e-3
    assert snap_angle(math.pi + 5e-13) == math.pi


def test_rx_snapping():
    assert builtin_action(Gate("rx", (0,), (math.pi,))) == builtin_action(Gate("x", (0,)))


@pytest.mark.parametrize(
    "g",
    [Gate("t", (0,)), Gate("tdg", (0,)), Gate("ccx", (0, 1, 2)), Gate("rx", (0,), (0.7,)), Gate("ry", (0,), (1.3,)), Gate("rz", (0,), (2.0,))],
)
def test_decompositions_reconstruct(g):
    dec = builtin_action(g)
    assert np.abs(dec.to_matrix() - gate_matrix(g.name, g.params)).max() <= 1e-9


def test_rz_convention():
    assert np.allclose(gate_matrix("rz", (0.4,)), np.diag([np.exp(-0.2j), np.exp(0.2j)]))


def test_gate_validation():
    with pytest.raises(UnknownGateError):
        Gate("foo", (0,))
    with pytest.raises(CircuitSyntaxError):
        Gate("cx", (0,))
    with pytest.raises(CircuitSyntaxError):
        Gate("rz", (0,))
    with pytest.raises(QubitIndexError):
        Gate("cx", (1, 1))
    with pytest.raises(CircuitSyntaxError):
        Gate("rz", (0,), (math.inf,))
    with pytest.raises(QubitIndexError):
        Circuit(2, (Gate("h", (2,)),))
    with pytest.raises(ValueError):
        builtin_action(Gate.measure(0))


def test_observables():
    assert Gate.measure(1).observable(3) == ConcretePauli("IZI")
    assert Gate.project(0, "1").observable(2) == ConcretePauli("ZI", 2)
    assert Gate.project(0, "-").observable(1) == ConcretePauli("X", 2)
    assert Gate.project(0, "+").observable(1) == ConcretePauli("X")


def test_error_codes():
    assert CircuitSyntaxError("x").code == 2
    assert QubitIndexError("x").code == 2
    assert UnknownGateError("x").code == 3
    assert CircuitSizeError("x").code == 4


# ---------------------------------------------------------------- parsing


def test_parse_golden():
    c = parse(GOLDEN_TEXT)
    assert c.n == 2
    assert [(g.name, g.targets) for g in c] == [("h", (0,)), ("h", (1,)), ("t", (0,)), ("cx", (0, 1)), ("cx", (0, 1))]


def test_parse_empty_body():
    c = parse('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\n')
    assert c.n == 3 and len(c) == 0


def test_parse_index_error():
    with pytest.raises(QubitIndexError) as err:
        parse("qreg q[2];\nt q[5];")
    assert err.value.line == 2


def test_parse_measure_project_angles_comments():
    text = """
    OPENQASM 2.0;
    qreg r[3]; // three qubits
    rz(-pi/4) r[0];
    rx(2*pi/3) r[1];
    ry(0.25) r[2];
    cnot r[0], r[2];
    measure r[1];
    project r[0] -> -;
    project r[2] -> 1;
    """
    c = parse(text)
    assert c.n == 3
    assert c.instructions[0].params == (-math.pi / 4,)
    assert c.instructions[1].params == (2 * math.pi / 3,)
    assert c.instructions[3].name == "cx"
    assert c.instructions[4].kind is GateKind.MEASURE
    assert c.instructions[5].outcome == "-"
    assert c.instructions[6].kind is GateKind.PROJECT
    assert c.has_measurements()


@pytest.mark.parametrize(
    "text, exc, line, col",
    [
        ("qreg q[2];\nfoo q[0];", UnknownGateError, 2, 1),
        ("qreg q[2];\nh q[0]", CircuitSyntaxError, 2, 1),
        ("h q[0];", CircuitSyntaxError, 1, 1),
        ("qreg q[2];\n  h p[0];", CircuitSyntaxError, 2, 3),
        ("qreg q[2];\nrz(pi/0) q[0];", CircuitSyntaxError, 2, 1),
        ("qreg q[2];\nrz(__import__('os')) q[0];", CircuitSyntaxError, 2, 1),
        ("qreg q[2];\ncx q[0];", CircuitSyntaxError, 2, 1),
        ("qreg q[2];\nproject q[0] -> 2;", CircuitSyntaxError, 2, 1),
        ("qreg q[2];\nqreg r[2];", CircuitSyntaxError, 2, 1),
        ("", CircuitSyntaxError, None, None),
    ],
)
def test_parse_errors(text, exc, line, col):
    with pytest.raises(exc) as err:
        parse(text)
    assert (err.value.line, err.value.column) == (line, col)


def test_parse_angle():
    assert parse_angle("pi/2") == math.pi / 2
    assert parse_angle("-3*pi/4 + 1") == -3 * math.pi / 4 + 1
    with pytest.raises(CircuitSyntaxError):
        parse_angle("1e400")
    with pytest.raises(CircuitSyntaxError):
        parse_angle("x")


@given(st.integers(1, 5), st.integers(0, 2**63), st.integers(0, 40))
def test_emit_parse_roundtrip(n, seed, size):
    c = random_circuit(SplitMix64(seed), n, size, max_non_clifford=5, measure_rate=(1, 5))
    c = Circuit(n, c.instructions + (Gate("ry", (0,), (0.1 + seed % 7 / 3,)),))
    assert parse(emit(c)) == c


def test_from_instructions():
    c = from_instructions(2, [("h", 0), ("cnot", 0, 1), ("rz", 1, (0.5,))])
    assert [g.name for g in c] == ["h", "cx", "rz"] and c.instructions[2].params == (0.5,)


def test_gate_counts():
    c = parse(GOLDEN_TEXT)
    assert c.gate_counts() == {"h": 2, "t": 1, "cx": 2}


# ---------------------------------------------------------------- inverse


def test_inverse_examples():
    c = from_instructions(2, [("h", 0), ("s", 1), ("cx", 0, 1)])
    assert [g.name for g in inverse(c)] == ["cx", "sdg", "h"]
    assert inverse(inverse(c)) == c
    rot = from_instructions(1, [("rx", 0, (0.3,)), ("t", 0)])
    assert [(g.name, g.params) for g in inverse(rot)] == [("tdg", ()), ("rx", (-0.3,))]


def test_inverse_rejects_measurement():
    with pytest.raises(ValueError):
        inverse(Circuit(1, (Gate.measure(0),)))


@given(st.integers(0, 2**63))
def test_inverse_is_dense_identity(seed):
    c = random_circuit(SplitMix64(seed), 3, 15, max_non_clifford=4)
    u = full_unitary(c + inverse(c))
    assert np.allclose(u, np.eye(8), atol=1e-9)
