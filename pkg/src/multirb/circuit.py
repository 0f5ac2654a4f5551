"""Elementary gates, gate circuits, their JSON records and dense unitaries.

Dense matrices use the physical basis ordering ``|up> = index 0``,
``|down> = index 1`` (so ``sigma_z = diag(1, -1)``) with qubit 0 as the
leftmost tensor factor.  Rotations follow ``R_u(theta) = exp(-i theta sigma_u / 2)``
and ``G = diag(1, i, i, 1)``.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from math import isclose, pi

import numpy as np

__all__ = [
    "Gate",
    "GateCircuit",
    "UnsupportedGateError",
    "circuit_unitary",
    "cnot",
    "g_gate",
    "gate_unitary",
    "idle",
    "pauli_pulse",
    "rx",
    "ry",
    "rz",
]

ROTATIONS = ("RX", "RY", "RZ")
ONE_QUBIT = ROTATIONS + ("PAULI", "ID")
TWO_QUBIT = ("G", "CNOT")
GATE_NAMES = ONE_QUBIT + TWO_QUBIT
PAULI_AXES = ("I", "X", "Y", "Z")

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class UnsupportedGateError(ValueError):
    """A gate outside the Clifford gate set, or a malformed gate record."""


@dataclass(frozen=True)
class Gate:
    """One elementary gate.

    ``turns`` is the signed number of quarter turns of a rotation; ``angle``
    (radians) may be given instead for arbitrary rotations, which only the
    dense engine accepts.  ``axis``/``sign`` describe a Pauli pulse
    ``exp(sign * i * sigma_axis * pi / 2)``.
    """

    name: str
    qubits: tuple[int, ...]
    turns: int | None = None
    axis: str | None = None
    sign: int = 1
    angle: float | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise UnsupportedGateError(f"unknown gate {self.name!r}")
        arity = 2 if self.name in TWO_QUBIT else 1
        if len(self.qubits) != arity:
            raise UnsupportedGateError(f"{self.name} acts on {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise UnsupportedGateError(f"{self.name} needs two distinct qubits")
        if self.name in ROTATIONS and (self.turns is None) == (self.angle is None):
            raise UnsupportedGateError(f"{self.name} needs exactly one of turns or angle")
        if self.name == "PAULI":
            if self.axis not in PAULI_AXES:
                raise UnsupportedGateError(f"bad Pauli axis {self.axis!r}")
            if self.sign not in (1, -1):
                raise UnsupportedGateError(f"bad Pauli sign {self.sign!r}")

    @property
    def rotation_angle(self) -> float:
        if self.angle is not None:
            return self.angle
        return self.turns * pi / 2

    @property
    def quarter_turns(self) -> int:
        """Rotation angle in quarter turns; raises for non-Clifford angles."""
        if self.turns is not None:
            return self.turns
        q = self.angle / (pi / 2)
        if not isclose(q, round(q), abs_tol=1e-12):
            raise UnsupportedGateError(f"{self.name}({self.angle}) is not a Clifford rotation")
        return int(round(q))

    def effective_pulses(self) -> float:
        """Count of equivalent pi/2 pulses about x or y; z rotations and waits are free."""
        if self.name in ("RX", "RY"):
            if self.turns is not None:
                return (1, 2, 1)[self.turns % 4 - 1] if self.turns % 4 else 0
            return abs(self.angle) / (pi / 2)
        if self.name == "PAULI":
            return 2 if self.axis in ("X", "Y") else 0
        return 0

    def to_record(self) -> dict:
        rec: dict = {"g": self.name}
        rec["q"] = list(self.qubits) if len(self.qubits) == 2 else self.qubits[0]
        if self.name in ROTATIONS:
            if self.turns is not None:
                rec["t"] = self.turns
            else:
                rec["theta"] = self.angle
        elif self.name == "PAULI":
            rec["axis"] = self.axis
            rec["sign"] = self.sign
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> Gate:
        try:
            name = rec["g"]
            q = rec["q"]
        except (KeyError, TypeError) as exc:
            raise UnsupportedGateError(f"malformed gate record {rec!r}") from exc
        qubits = tuple(int(x) for x in q) if isinstance(q, (list, tuple)) else (int(q),)
        if name in ROTATIONS:
            if "t" in rec:
                return cls(name, qubits, turns=int(rec["t"]))
            if "theta" in rec:
                return cls(name, qubits, angle=float(rec["theta"]))
            raise UnsupportedGateError(f"rotation record without t or theta: {rec!r}")
        if name == "PAULI":
            return cls(name, qubits, axis=rec.get("axis"), sign=int(rec.get("sign", 1)))
        return cls(name, qubits)


def rx(q: int, turns: int = 1) -> Gate:
    return Gate("RX", (q,), turns=turns)


def ry(q: int, turns: int = 1) -> Gate:
    return Gate("RY", (q,), turns=turns)


def rz(q: int, turns: int = 1) -> Gate:
    return Gate("RZ", (q,), turns=turns)


def pauli_pulse(q: int, axis: str, sign: int = 1) -> Gate:
    return Gate("PAULI", (q,), axis=axis, sign=sign)


def idle(q: int) -> Gate:
    return Gate("ID", (q,))


def g_gate(a: int, b: int) -> Gate:
    return Gate("G", (a, b))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


@dataclass(frozen=True)
class GateCircuit:
    """Gates in time order (first element applied first)."""

    n_qubits: int
    gates: tuple[Gate, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise UnsupportedGateError(f"{g} addresses a qubit outside 0..{self.n_qubits - 1}")

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: GateCircuit) -> GateCircuit:
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits on different qubit counts")
        return GateCircuit(self.n_qubits, self.gates + other.gates)

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def effective_pulses(self) -> float:
        return sum(g.effective_pulses() for g in self.gates)

    def to_records(self) -> list[dict]:
        return [g.to_record() for g in self.gates]

    def serialized(self) -> str:
        return json.dumps(self.to_records(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_records(cls, n_qubits: int, records) -> GateCircuit:
        return cls(n_qubits, tuple(Gate.from_record(r) for r in records))

    def remap(self, mapping: dict[int, int], n_qubits: int) -> GateCircuit:
        """Relabel qubits, e.g. to place a two-qubit circuit inside a wider register."""
        out = []
        for g in self.gates:
            out.append(Gate(g.name, tuple(mapping[q] for q in g.qubits), g.turns, g.axis, g.sign, g.angle))
        return GateCircuit(n_qubits, tuple(out))


def _rotation(axis: str, theta: float) -> np.ndarray:
    return np.cos(theta / 2) * SIGMA["I"] - 1j * np.sin(theta / 2) * SIGMA[axis]


def gate_matrix(gate: Gate, overrotation: float = 0.0) -> np.ndarray:
    """Matrix of ``gate`` on its own qubits (2x2 or 4x4)."""
    scale = 1.0 + overrotation
    if gate.name in ROTATIONS:
        return _rotation(gate.name[1], gate.rotation_angle * scale)
    if gate.name == "PAULI":
        # exp(i s sigma pi/2) = i s sigma at the nominal angle
        theta = gate.sign * pi / 2 * scale
        return np.cos(theta) * SIGMA["I"] + 1j * np.sin(theta) * SIGMA[gate.axis]
    if gate.name == "ID":
        return SIGMA["I"].copy()
    if gate.name == "G":
        return np.diag([1, 1j, 1j, 1]).astype(complex)
    if gate.name == "CNOT":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    raise UnsupportedGateError(gate.name)


def embed(local: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Lift a 1- or 2-qubit matrix acting on ``qubits`` to the full register."""
    k = len(qubits)
    dim = 2**n
    tensor = local.reshape([2] * (2 * k))
    full = np.eye(dim, dtype=complex).reshape([2] * (2 * n))
    # contract the gate's input legs with the identity's output legs on `qubits`
    out = np.tensordot(tensor, full, axes=(list(range(k, 2 * k)), list(qubits)))
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(dim, dim)


@functools.lru_cache(maxsize=4096)
def _gate_unitary_cached(gate: Gate, n: int, overrotation: float) -> np.ndarray:
    u = embed(gate_matrix(gate, overrotation), gate.qubits, n)
    u.flags.writeable = False
    return u


def gate_unitary(gate: Gate, n: int, overrotation: float = 0.0) -> np.ndarray:
    return _gate_unitary_cached(gate, n, float(overrotation))


def circuit_unitary(circuit: GateCircuit, overrotation: float = 0.0) -> np.ndarray:
    u = np.eye(2**circuit.n_qubits, dtype=complex)
    for g in circuit:
        u = gate_unitary(g, circuit.n_qubits, overrotation) @ u
    return u
