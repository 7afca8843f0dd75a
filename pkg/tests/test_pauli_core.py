"""Pauli algebra against an independent dense-matrix oracle."""
import cmath
import itertools
import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abstraqt.circuit_ir import CLIFFORD_NAMES, gate_matrix
from abstraqt.pauli_core import (
    CliffordTable,
    ConcretePauli,
    NotCliffordError,
    PauliList,
    PauliSumDecomposition,
    classify_gate,
    commutator,
    conjugate_concrete,
    dense,
    multiply,
    window_index,
    window_letters,
)

# independent reference matrices, written out by hand
_REF = {
    0: np.eye(2),
    1: np.array([[0, 1], [1, 0]]),
    2: np.array([[0, -1j], [1j, 0]]),
    3: np.array([[1, 0], [0, -1]]),
}


def ref_dense(p: ConcretePauli) -> np.ndarray:
    return (1j ** p.prefactor) * reduce(np.kron, [_REF[int(c)] for c in p.letters])


@st.composite
def paulis(draw, n=None, hermitian=False):
    n = n if n is not None else draw(st.integers(1, 4))
    letters = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    v = draw(st.sampled_from([0, 2])) if hermitian else draw(st.integers(0, 3))
    return ConcretePauli(letters, v)


@st.composite
def pauli_pairs(draw):
    n = draw(st.integers(1, 4))
    return draw(paulis(n)), draw(paulis(n))


# ---------------------------------------------------------------- representation


def test_dense_examples():
    assert np.array_equal(dense(ConcretePauli("Z")), np.diag([1, -1]))
    assert np.array_equal(dense(ConcretePauli("II")), np.eye(4))
    assert np.array_equal(dense(ConcretePauli("Y", 1)), np.array([[0, 1], [-1, 0]]))


def test_dense_guard():
    with pytest.raises(ValueError):
        dense(ConcretePauli.identity(13))


def test_from_str_and_str():
    p = ConcretePauli.from_str("-iXZ")
    assert p.prefactor == 3 and list(p.letters) == [1, 3]
    assert str(p) == "-iXZ"
    assert ConcretePauli.from_str("YI") == ConcretePauli([2, 0])


def test_rejects_bad_letters():
    with pytest.raises(ValueError):
        ConcretePauli([0, 4])
    with pytest.raises(ValueError):
        ConcretePauli([])


@given(paulis())
def test_pref_bare_roundtrip(p):
    assert p.bare().prefactor == 0
    assert np.allclose((1j ** p.prefactor) * ref_dense(p.bare()), ref_dense(p))
    assert np.allclose(dense(p), ref_dense(p))


def test_window_index_roundtrip():
    for k in (1, 2, 3):
        for idx in range(4**k):
            assert window_index(window_letters(idx, k)) == idx


# ---------------------------------------------------------------- multiplication


def test_multiply_examples():
    xy = multiply(ConcretePauli("X"), ConcretePauli("Y"))
    assert xy == ConcretePauli("Z", 1)
    q = ConcretePauli("XY", 3)
    assert multiply(ConcretePauli("II"), q) == q
    # (i X Z)(i^3 Y Z) = i^4 (XY)(ZZ) = iZ (x) I
    assert multiply(ConcretePauli("XZ", 1), ConcretePauli("YZ", 3)) == ConcretePauli("ZI", 1)


def test_multiply_exhaustive_single_qubit():
    for a, va, b, vb in itertools.product(range(4), range(4), range(4), range(4)):
        pa, pb = ConcretePauli([a], va), ConcretePauli([b], vb)
        assert np.allclose(dense(multiply(pa, pb)), ref_dense(pa) @ ref_dense(pb))


@given(pauli_pairs())
def test_multiply_matches_dense(pair):
    a, b = pair
    assert np.allclose(ref_dense(a * b), ref_dense(a) @ ref_dense(b))


def test_multiply_size_mismatch():
    with pytest.raises(ValueError):
        multiply(ConcretePauli("X"), ConcretePauli("XX"))


# ---------------------------------------------------------------- commutator


def test_commutator_examples():
    assert commutator(ConcretePauli("X"), ConcretePauli("Z")) == 1
    assert commutator(ConcretePauli("XY"), ConcretePauli("XY")) == 0
    # two anticommuting positions cancel
    assert commutator(ConcretePauli("XX"), ConcretePauli("ZZ")) == 0
    # only position 0 anticommutes here; the dense check agrees
    a, b = ref_dense(ConcretePauli("XZ")), ref_dense(ConcretePauli("ZZ"))
    assert not np.allclose(a @ b, b @ a)
    assert commutator(ConcretePauli("XZ"), ConcretePauli("ZZ")) == 1


@given(pauli_pairs())
def test_commutator_matches_dense(pair):
    a, b = pair
    da, db = ref_dense(a), ref_dense(b)
    assert commutator(a, b) == (0 if np.allclose(da @ db, db @ da) else 1)


def test_commutator_size_mismatch():
    with pytest.raises(ValueError):
        commutator(ConcretePauli("X"), ConcretePauli("XX"))


# ---------------------------------------------------------------- classification


def test_t_gate_decomposition():
    dec = classify_gate(gate_matrix("t"))
    assert isinstance(dec, PauliSumDecomposition)
    assert [letters for _, letters in dec.terms] == [(0,), (3,)]
    d1, d2 = (c for c, _ in dec.terms)
    w = cmath.exp(1j * math.pi / 4)
    assert abs(d1 - (1 + w) / 2) < 1e-12 and abs(d2 - (1 - w) / 2) < 1e-12
    # rounded polar form e^{-0.1+0.4i} and e^{-1.0-1.2i}
    assert (round(math.log(abs(d1)), 1), round(cmath.phase(d1), 1)) == (-0.1, 0.4)
    assert (round(math.log(abs(d2)), 1), round(cmath.phase(d2), 1)) == (-1.0, -1.2)


def test_cx_table():
    table = classify_gate(gate_matrix("cx"))
    assert isinstance(table, CliffordTable)
    assert len(table.letters) == 16
    assert table.lookup((1, 0)) == ((1, 1), 0)  # X(x)I -> X(x)X
    assert table.lookup((0, 3)) == ((3, 3), 0)  # I(x)Z -> Z(x)Z


def test_identity_table():
    table = classify_gate(np.eye(2))
    assert isinstance(table, CliffordTable)
    for idx in range(4):
        assert table.lookup(window_letters(idx, 1)) == (window_letters(idx, 1), 0)


def test_classify_rejects_non_unitary():
    with pytest.raises(ValueError):
        classify_gate(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        classify_gate(np.eye(3))


@pytest.mark.parametrize("name", sorted(CLIFFORD_NAMES))
def test_clifford_tables_match_dense(name):
    u = gate_matrix(name)
    table = classify_gate(u)
    assert isinstance(table, CliffordTable)
    k = table.num_qubits
    for idx in range(4**k):
        window = window_letters(idx, k)
        out, phase = table.lookup(window)
        expected = u @ ref_dense(ConcretePauli(window)) @ u.conj().T
        assert np.allclose(ref_dense(ConcretePauli(out, phase)), expected, atol=1e-9)


@pytest.mark.parametrize(
    "name, params", [("t", ()), ("tdg", ()), ("ccx", ()), ("rx", (math.pi / 4,)), ("rz", (2.0,)), ("ry", (0.3,))]
)
def test_decompositions_reconstruct(name, params):
    u = gate_matrix(name, params)
    dec = classify_gate(u)
    assert isinstance(dec, PauliSumDecomposition)
    assert np.abs(dec.to_matrix() - u).max() <= 1e-9
    letters = [t for _, t in dec.terms]
    assert len(set(letters)) == len(letters)


def test_conjugate_examples():
    h = classify_gate(gate_matrix("h"))
    s = classify_gate(gate_matrix("s"))
    assert conjugate_concrete(h, [0], ConcretePauli("ZI")) == ConcretePauli("XI")
    assert conjugate_concrete(h, [0], ConcretePauli("X")) == ConcretePauli("Z")
    assert conjugate_concrete(s, [0], ConcretePauli("X")) == ConcretePauli("Y")


def test_conjugate_rejects_decomposition():
    with pytest.raises(NotCliffordError):
        conjugate_concrete(classify_gate(gate_matrix("t")), [0], ConcretePauli("X"))


def test_conjugate_bad_targets():
    cx = classify_gate(gate_matrix("cx"))
    with pytest.raises(ValueError):
        conjugate_concrete(cx, [0, 0], ConcretePauli("XX"))
    with pytest.raises(ValueError):
        conjugate_concrete(cx, [0, 2], ConcretePauli("XX"))


def _padded(u: np.ndarray, targets, n: int) -> np.ndarray:
    """Dense ``u`` acting on ``targets`` of ``n`` qubits (independent permutation construction)."""
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(u, np.eye(2 ** (n - k))).reshape((2,) * (2 * n))
    order = list(targets) + rest
    inv = np.argsort(order)
    full = full.transpose(list(inv) + [n + i for i in inv])
    return full.reshape(2**n, 2**n)


@given(st.data())
def test_conjugate_on_embedded_targets(data):
    n = data.draw(st.integers(2, 4))
    name = data.draw(st.sampled_from(["h", "s", "cx", "cz", "swap", "y"]))
    u = gate_matrix(name)
    k = int(u.shape[0]).bit_length() - 1
    targets = data.draw(st.permutations(range(n)))[:k]
    p = data.draw(paulis(n))
    out = conjugate_concrete(classify_gate(u), targets, p)
    big = _padded(u, targets, n)
    assert np.allclose(ref_dense(out), big @ ref_dense(p) @ big.conj().T)


# ---------------------------------------------------------------- Pauli lists


def test_pauli_list_basics():
    q = PauliList.computational(3)
    assert len(q) == 3 and q.n == 3
    assert [str(p) for p in q] == ["+ZII", "+IZI", "+IIZ"]
    assert list(q.commutators(ConcretePauli("XII"))) == [1, 0, 0]
    assert q.product([1, 0, 1]) == ConcretePauli("ZIZ")
    assert q.swap(0, 2)[0] == ConcretePauli("IIZ")
    assert q.replace({1: ConcretePauli("XXX", 2)})[1] == ConcretePauli("XXX", 2)
    assert q == PauliList.from_paulis(list(q)) and hash(q) == hash(PauliList.from_paulis(list(q)))


@given(st.data())
def test_pauli_list_conjugate_matches_elementwise(data):
    n = data.draw(st.integers(2, 4))
    rows = data.draw(st.lists(paulis(n, hermitian=True), min_size=1, max_size=4))
    name = data.draw(st.sampled_from(["h", "sdg", "cx", "swap"]))
    table = classify_gate(gate_matrix(name))
    targets = data.draw(st.permutations(range(n)))[: table.num_qubits]
    conj = PauliList.from_paulis(rows).conjugate(table, targets)
    assert list(conj) == [conjugate_concrete(table, targets, p) for p in rows]
