import itertools

import numpy as np
import pytest
from conftest import (
    PAULI,
    down_state,
    oracle_unitary,
    pauli_matrix,
    random_circuit,
)
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from multirb.circuit import Gate, GateCircuit, UnsupportedGateError, g_gate, rx, ry, rz
from multirb.clifford import (
    ALL_PULSES,
    CliffordElement,
    PauliOperator,
    PauliPulse,
    StabilizerState,
    class_of,
    clifford_from_circuit,
    compose,
    conjugate_pauli,
    inverse,
)
from multirb.symplectic import (
    BinarySymplectic,
    DimensionError,
    enumerate_symplectic,
    symplectic_inv,
)


def all_paulis(n):
    return ["+" + "".join(p) for p in itertools.product("IXYZ", repeat=n)]


def random_clifford(n, rng, length=10):
    return clifford_from_circuit(random_circuit(n, length, rng))


def tableau_matches_unitary(c: CliffordElement, u: np.ndarray) -> bool:
    for label in all_paulis(c.n):
        p = PauliOperator.from_string(label)
        img = conjugate_pauli(c, p)
        if not np.allclose(u @ pauli_matrix(label) @ u.conj().T, pauli_matrix(str(img))):
            return False
    return True


class TestPauliOperator:
    def test_string_round_trip(self):
        for s in ("+XZ", "-IY", "+iXX", "-iZI", "+I"):
            assert str(PauliOperator.from_string(s)) == s

    def test_products_match_matrices(self):
        labels = all_paulis(2)
        for a, b in itertools.product(labels, repeat=2):
            pa, pb = PauliOperator.from_string(a), PauliOperator.from_string(b)
            prod = pa * pb
            assert np.allclose(pauli_matrix(a) @ pauli_matrix(b), pauli_matrix(str(prod)))
            assert pa.commutes(pb) == np.allclose(
                pauli_matrix(a) @ pauli_matrix(b), pauli_matrix(b) @ pauli_matrix(a))

    def test_support_and_letters(self):
        p = PauliOperator.from_string("-XIZ")
        assert p.letters == "XIZ"
        assert p.support == "101"
        assert p.sign == -1 and p.is_hermitian


def test_pulse_values():
    assert len(set(ALL_PULSES)) == 8
    assert str(PauliPulse.from_string("-Y")) == "-Y"
    with pytest.raises(ValueError):
        PauliPulse("W")


def test_compose_with_identity():
    rng = np.random.default_rng(1)
    c = random_clifford(2, rng)
    ident = CliffordElement.identity(2)
    assert compose(c, ident) == c
    assert compose(ident, c) == c


def test_class_reverses_composition_order():
    # rows are generator images, so the map to classes reverses products
    rng = np.random.default_rng(2)
    for _ in range(1000):
        c1 = random_clifford(2, rng, 6)
        c2 = random_clifford(2, rng, 6)
        assert class_of(compose(c1, c2)) == class_of(c2) @ class_of(c1)


def test_class_of_circuit_concatenation():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = random_circuit(3, 6, rng)
        b = random_circuit(3, 6, rng)
        assert class_of(clifford_from_circuit(a + b)) == class_of(clifford_from_circuit(a)) @ class_of(
            clifford_from_circuit(b))


def test_double_quarter_turn_flips_z():
    c = clifford_from_circuit(GateCircuit(1, (rx(0), rx(0))))
    assert str(conjugate_pauli(c, PauliOperator.from_string("+Z"))) == "-Z"
    u = oracle_unitary(GateCircuit(1, (rx(0), rx(0))))
    assert np.allclose(u @ PAULI["Z"] @ u.conj().T, -PAULI["Z"])


def test_rx_sends_z_to_minus_y():
    c = clifford_from_circuit(GateCircuit(1, (rx(0),)))
    assert str(conjugate_pauli(c, PauliOperator.from_string("+Z"))) == "-Y"


def test_g_image_of_x_on_first_qubit():
    c = clifford_from_circuit(GateCircuit(2, (g_gate(0, 1),)))
    img = conjugate_pauli(c, PauliOperator.from_string("+XI"))
    u = np.diag([1, 1j, 1j, 1])
    assert np.allclose(u @ pauli_matrix("+XI") @ u.conj().T, pauli_matrix(str(img)))
    assert img.letters == "YZ"


def test_conjugation_by_identity():
    ident = CliffordElement.identity(2)
    for label in all_paulis(2):
        p = PauliOperator.from_string(label)
        assert conjugate_pauli(ident, p) == p


def test_qubit_count_mismatch():
    with pytest.raises(DimensionError):
        conjugate_pauli(CliffordElement.identity(2), PauliOperator.from_string("+X"))
    with pytest.raises(DimensionError):
        compose(CliffordElement.identity(1), CliffordElement.identity(2))


def test_inverse_basics():
    ident = CliffordElement.identity(3)
    assert inverse(ident) == ident
    rng = np.random.default_rng(4)
    for _ in range(1000):
        c = random_clifford(2, rng, 8)
        assert compose(inverse(c), c) == CliffordElement.identity(2)
        assert inverse(inverse(c)) == c


def test_inverse_class_exhaustive():
    for m in enumerate_symplectic(2):
        c = CliffordElement(2, m.rows, (0,) * 4)
        assert class_of(inverse(c)) == symplectic_inv(m)


def test_two_g_circuit_class(two_g_circuit, m_c):
    assert class_of(clifford_from_circuit(two_g_circuit)) == m_c


def test_empty_circuit_is_identity():
    assert clifford_from_circuit(GateCircuit(3)) == CliffordElement.identity(3)


def test_ms_sandwich_equals_g():
    x, y = PAULI["X"], PAULI["Y"]

    def axis(phi):
        return np.cos(phi) * x + np.sin(phi) * y

    def pulses(phi):
        p = expm(-0.25j * np.pi * axis(phi))
        return np.kron(p, p)

    g = np.diag([1, 1j, 1j, 1])
    for phi in (0.0, 0.4, 2.0):
        ms = expm(-0.25j * np.pi * np.kron(axis(phi), axis(phi)))
        u = pulses(phi + np.pi / 2) @ ms @ pulses(phi - np.pi / 2)
        phase = u[0, 0] / g[0, 0]
        assert np.isclose(abs(phase), 1)
        assert np.allclose(u, phase * g)


def test_non_clifford_angle_rejected():
    with pytest.raises(UnsupportedGateError):
        clifford_from_circuit(GateCircuit(1, (Gate("RX", (0,), angle=0.3),)))
    ok = clifford_from_circuit(GateCircuit(1, (Gate("RX", (0,), angle=np.pi / 2),)))
    assert ok == clifford_from_circuit(GateCircuit(1, (rx(0),)))


@pytest.mark.parametrize("n,count", [(1, 300), (2, 500), (3, 60)])
def test_dense_oracle_agreement(n, count):
    rng = np.random.default_rng(100 + n)
    for _ in range(count):
        circ = random_circuit(n, int(rng.integers(1, 13)), rng)
        assert tableau_matches_unitary(clifford_from_circuit(circ), oracle_unitary(circ))


@pytest.mark.parametrize("n", [1, 2])
def test_pauli_pulses_are_the_kernel(n):
    for combo in itertools.product(ALL_PULSES, repeat=n):
        circ = GateCircuit(n, tuple(p.gate(q) for q, p in enumerate(combo)))
        c = clifford_from_circuit(circ)
        assert class_of(c).is_identity() and c.is_pauli()
        assert tableau_matches_unitary(c, oracle_unitary(circ))


def test_identity_class_means_pauli():
    for phases in itertools.product((0, 2), repeat=4):
        c = CliffordElement(2, BinarySymplectic.identity(2).rows, phases)
        matches = [lab for lab in all_paulis(2)
                   if CliffordElement.from_pauli(PauliOperator.from_string(lab)) == c]
        assert len(matches) == 1


def test_commutation_preserved():
    rng = np.random.default_rng(5)
    labels = all_paulis(3)
    for _ in range(1000):
        c = random_clifford(3, rng, 8)
        p1 = PauliOperator.from_string(labels[rng.integers(64)])
        p2 = PauliOperator.from_string(labels[rng.integers(64)])
        assert conjugate_pauli(c, p1).commutes(conjugate_pauli(c, p2)) == p1.commutes(p2)


def test_stabilizer_outcomes_match_dense():
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        circ = random_circuit(n, 8, rng)
        state = StabilizerState.prepared(n).evolve_circuit(circ)
        psi = oracle_unitary(circ) @ down_state(n)
        for q in range(n):
            z = PauliOperator.single(n, q, "Z")
            label = "+" + "".join("Z" if k == q else "I" for k in range(n))
            exp = np.real(psi.conj() @ pauli_matrix(label) @ psi)
            assert np.isclose(state.expectation(z), exp, atol=1e-9)


def test_prepared_state_outcome():
    assert StabilizerState.prepared(3).outcome_bits() == "000"
    flipped = StabilizerState.prepared(2).evolve_circuit(GateCircuit(2, (rx(1, 2),)))
    assert flipped.outcome_bits() == "01"
    random_q = StabilizerState.prepared(1).evolve_circuit(GateCircuit(1, (ry(0),)))
    assert random_q.outcome_bits() is None


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["RX", "RY", "RZ"]), st.integers(0, 1), st.integers(-3, 3)),
                min_size=0, max_size=10))
def test_property_rotation_circuits(spec):
    gates = [{"RX": rx, "RY": ry, "RZ": rz}[name](q, t) for name, q, t in spec]
    circ = GateCircuit(2, tuple(gates) + (g_gate(0, 1),))
    assert tableau_matches_unitary(clifford_from_circuit(circ), oracle_unitary(circ))
