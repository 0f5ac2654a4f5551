import functools

import numpy as np
import pytest
from scipy.linalg import expm

from multirb.circuit import GateCircuit, g_gate, rx, ry
from multirb.symplectic import BinarySymplectic

# Independent dense oracle: basis |up> = index 0, qubit 0 leftmost.
I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Matrix of a string such as ``"-XZ"`` or ``"+iIY"``."""
    coeff = {"+": 1, "-": -1}[label[0]]
    rest = label[1:]
    if rest.startswith("i"):
        coeff *= 1j
        rest = rest[1:]
    return coeff * functools.reduce(np.kron, [PAULI[c] for c in rest])


def _lift(local: np.ndarray, qubits, n: int) -> np.ndarray:
    if len(qubits) == 1:
        ops = [local if q == qubits[0] else I2 for q in range(n)]
        return functools.reduce(np.kron, ops)
    # two-qubit: expand in the Pauli basis and lift each term
    a, b = qubits
    out = np.zeros((2**n, 2**n), dtype=complex)
    for la in "IXYZ":
        for lb in "IXYZ":
            c = np.trace(np.kron(PAULI[la], PAULI[lb]).conj().T @ local) / 4
            if abs(c) < 1e-15:
                continue
            ops = [PAULI[la] if q == a else PAULI[lb] if q == b else I2 for q in range(n)]
            out += c * functools.reduce(np.kron, ops)
    return out


def oracle_gate(gate, n: int, overrotation: float = 0.0) -> np.ndarray:
    s = 1 + overrotation
    if gate.name in ("RX", "RY", "RZ"):
        local = expm(-0.5j * gate.rotation_angle * s * PAULI[gate.name[1]])
    elif gate.name == "PAULI":
        local = expm(0.5j * np.pi * gate.sign * s * PAULI[gate.axis])
    elif gate.name == "ID":
        local = I2
    elif gate.name == "G":
        local = np.diag([1, 1j, 1j, 1])
    elif gate.name == "CNOT":
        local = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    else:
        raise ValueError(gate.name)
    return _lift(local, gate.qubits, n)


def oracle_unitary(circuit: GateCircuit, overrotation: float = 0.0) -> np.ndarray:
    u = np.eye(2**circuit.n_qubits, dtype=complex)
    for g in circuit:
        u = oracle_gate(g, circuit.n_qubits, overrotation) @ u
    return u


def down_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[-1] = 1
    return psi


def outcome_string(index: int, n: int) -> str:
    """Measured bits for basis index: ``1`` for up, ``0`` for down."""
    return "".join("1" if c == "0" else "0" for c in format(index, f"0{n}b"))


def random_circuit(n: int, length: int, rng) -> GateCircuit:
    from multirb.circuit import cnot, pauli_pulse, rz

    gates = []
    for _ in range(length):
        kind = rng.integers(0, 6 if n > 1 else 4)
        q = int(rng.integers(0, n))
        t = int(rng.choice([-1, 1, 2]))
        if kind == 0:
            gates.append(rx(q, t))
        elif kind == 1:
            gates.append(ry(q, t))
        elif kind == 2:
            gates.append(rz(q, t))
        elif kind == 3:
            gates.append(pauli_pulse(q, "IXYZ"[rng.integers(0, 4)], int(rng.choice([-1, 1]))))
        else:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append((g_gate if kind == 4 else cnot)(int(a), int(b)))
    return GateCircuit(n, gates)


M_C_ROWS = ["0101", "0111", "1100", "1000"]


@pytest.fixture
def m_c():
    return BinarySymplectic.from_strings(M_C_ROWS)


@pytest.fixture
def two_g_circuit():
    # pi/2 about x on the second qubit; G; x on the first and y on the second; G; again
    return GateCircuit(2, (rx(1), g_gate(0, 1), rx(0), ry(1), g_gate(0, 1), rx(0), ry(1)))


# one PASS/FAIL line per acceptance criterion in the terminal summary
_ACCEPTANCE: dict[str, bool] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[key] = _ACCEPTANCE.get(key, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(f"{key} {'PASS' if _ACCEPTANCE[key] else 'FAIL'}")
