import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpqc import qsim
from mpqc.circuits import QuantumCircuit, random_quantum_circuit
from mpqc.pauliframe import (
    CNOT_TABLE,
    NonCliffordError,
    PauliMask,
    PXElement,
    conjugate_single,
    conjugate_through_clifford,
    conjugate_through_T,
    correction_element,
    defer_pauli,
    px_compose,
    px_elements,
    px_invert,
    px_matrix,
    remove_pending_p,
)
from mpqc.protocols import e_table_bits

X = np.array([[0, 1], [1, 0]], complex)
Z = np.diag([1, -1]).astype(complex)
P = np.diag([1, 1j])
T = np.diag([1, np.exp(1j * np.pi / 4)])
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
GATES = {"I": np.eye(2), "X": X, "Z": Z, "H": H, "P": P}


def pauli(a, b):
    return np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)


def equal_up_to_phase(m1, m2, tol=1e-12):
    idx = np.unravel_index(np.argmax(np.abs(m2)), m2.shape)
    if abs(m1[idx]) < tol:
        return False
    phase = m1[idx] / m2[idx]
    return abs(abs(phase) - 1) < tol and np.allclose(m1, phase * m2, atol=tol)


@pytest.mark.parametrize("gate", sorted(GATES))
@pytest.mark.parametrize("a,b", list(itertools.product((0, 1), repeat=2)))
def test_single_qubit_conjugation_matches_matrix_oracle(gate, a, b):
    g = GATES[gate]
    a2, b2 = conjugate_single(gate, a, b)
    assert equal_up_to_phase(g @ pauli(a, b), pauli(a2, b2) @ g)


def test_conjugate_single_rejects_T():
    with pytest.raises(NonCliffordError):
        conjugate_single("T", 1, 0)


def _two_qubit_pauli(ac, bc, at, bt):
    # little-endian: control is qubit 0 (low bit), so kron(target, control)
    return np.kron(pauli(at, bt), pauli(ac, bc))


CNOT = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], complex)


@pytest.mark.parametrize("key", sorted(CNOT_TABLE))
def test_cnot_table_matches_4x4_oracle(key):
    img = CNOT_TABLE[key]
    assert equal_up_to_phase(CNOT @ _two_qubit_pauli(*key), _two_qubit_pauli(*img) @ CNOT)


def test_cnot_table_is_a_bijection_with_expected_shape():
    assert len(CNOT_TABLE) == 16
    assert len(set(CNOT_TABLE.values())) == 16
    for (ac, bc, at, bt), (ac2, bc2, at2, bt2) in CNOT_TABLE.items():
        assert (ac2, at2) == (ac, at ^ ac)
        assert (bc2, bt2) == (bc ^ bt, bt)


@pytest.mark.parametrize("a,b", list(itertools.product((0, 1), repeat=2)))
def test_T_rule_exhaustive_matrix_oracle(a, b):
    a2, b2, p = conjugate_through_T(a, b)
    lhs = T @ pauli(a, b)
    rhs = pauli(a2, b2) @ np.linalg.matrix_power(P, p) @ T
    assert equal_up_to_phase(lhs, rhs)


@pytest.mark.parametrize("a,b", list(itertools.product((0, 1), repeat=2)))
def test_pending_phase_removal_matches_matrices(a, b):
    a2, b2, p = conjugate_through_T(a, b)
    fixed = np.linalg.matrix_power(P.conj().T, p) @ pauli(a2, b2) @ np.linalg.matrix_power(P, p)
    a3, b3 = remove_pending_p(a2, b2, p)
    assert equal_up_to_phase(fixed, pauli(a3, b3))


def test_px_matrix_definition():
    e = PXElement(1, 3, 2)
    want = (1j**2) * X @ np.linalg.matrix_power(P, 3)
    assert np.allclose(px_matrix(e), want)
    assert np.allclose(px_matrix(e, conjugated=True), H @ want @ H)


def test_px_group_has_32_distinct_matrices():
    mats = [px_matrix(e) for e in px_elements()]
    assert len(mats) == 32
    for i, j in itertools.combinations(range(32), 2):
        assert not np.allclose(mats[i], mats[j])


def test_px_compose_matches_matrix_product_exactly():
    for e1, e2 in itertools.product(px_elements(), repeat=2):
        assert np.allclose(px_matrix(px_compose(e1, e2)), px_matrix(e1) @ px_matrix(e2))


def test_px_invert_and_identity():
    ident = PXElement()
    for e in px_elements():
        assert px_compose(e, px_invert(e)) == ident
        assert px_compose(px_invert(e), e) == ident
        assert np.allclose(px_matrix(px_invert(e)), px_matrix(e).conj().T)


@settings(max_examples=60, deadline=None)
@given(*[st.sampled_from(px_elements())] * 3)
def test_px_associativity(e1, e2, e3):
    assert px_compose(px_compose(e1, e2), e3) == px_compose(e1, px_compose(e2, e3))


def test_px_bits_round_trip():
    for e in px_elements():
        assert PXElement.from_bits(e.bits()) == e


@pytest.mark.parametrize("p", [0, 1])
def test_correction_element_is_pdagger_power_times_inverse(p):
    for r in px_elements():
        want = np.linalg.matrix_power(P.conj().T, p) @ px_matrix(r).conj().T
        assert np.allclose(px_matrix(correction_element(p, r)), want)


def test_boolean_decode_formula_agrees_on_all_64_cases():
    for r, p in itertools.product(px_elements(), (0, 1)):
        assert e_table_bits(r, p) == correction_element(p, r).bits()


def test_mask_xor_and_equality():
    m = PauliMask([1, 0], [0, 1])
    assert (m ^ m) == PauliMask.zeros(2)
    with pytest.raises(ValueError):
        PauliMask([1], [0, 1])


def _apply_mask(state, mask):
    for q, (a, b) in enumerate(mask.pairs()):
        state = qsim.apply_pauli(state, q, a, b)
    return state


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_defer_pauli_matches_simulation(nq, ng, seed):
    """Masks interleaved with the gates equal one final frame after the circuit."""
    rng = np.random.default_rng(seed)
    circ = random_quantum_circuit(nq, ng, rng)
    masks = [PauliMask(rng.integers(0, 2, nq), rng.integers(0, 2, nq)) for _ in range(ng + 1)]
    frame, ps = defer_pauli(circ, masks)
    s = qsim.random_state(nq, rng)
    want = _apply_mask(qsim.run_circuit(s, circ.pairs()), frame)
    got = s
    pi = iter(ps)
    for i, (kind, targets) in enumerate(circ.pairs()):
        got = _apply_mask(got, masks[i])
        got = qsim.apply_gate(got, kind, targets)
        if kind == "T":
            if next(pi):
                got = qsim.apply_matrix(got, P.conj().T, targets)
    got = _apply_mask(got, masks[ng])
    assert qsim.fidelity(got, want) == pytest.approx(1.0, abs=1e-10)


def test_clifford_conjugation_on_masks():
    m = PauliMask([1, 0], [0, 0])
    out = conjugate_through_clifford("CNOT", (0, 1), m)
    assert out == PauliMask([1, 1], [0, 0])
    out = conjugate_through_clifford("H", (1,), out)
    assert out == PauliMask([1, 0], [0, 1])


def test_defer_pauli_without_masks_is_identity_frame():
    circ = QuantumCircuit(2, [("H", (0,)), ("T", (0,)), ("CNOT", (0, 1))])
    frame, ps = defer_pauli(circ, [])
    assert frame == PauliMask.zeros(2) and ps == [0]
