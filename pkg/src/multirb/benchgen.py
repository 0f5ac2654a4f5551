"""Randomized benchmarking sequences and their error-free predicted outcomes.

A step is a layer of independent Pauli pulses followed by a circuit for a
uniformly random symplectic class.  After ``l`` steps a final step (its own
Pauli layer, then one synthesized circuit) returns the register to a state in
which the measured quantity is deterministic:

* ``FULL_INVERSE``: the final class undoes all preceding classes.
* ``RANDOM_LOGICAL``: the net class is a uniformly random invertible linear
  map of the computational basis (a CNOT-type circuit), so every qubit is
  still deterministic.
* ``RANDOM_JOINT_Z``: the net class is a uniformly random Clifford class
  followed by local classes that turn a random stabilizer element into a
  product of ``sigma_z`` on some subset; only that parity is predicted.

The predicted outcome comes from propagating the preparation (every qubit in
the ``-1`` eigenstate of ``sigma_z``) through the actual circuits.  Bit ``0``
denotes that prepared (down) state.
"""
from __future__ import annotations

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .circuit import Gate, GateCircuit, UnsupportedGateError, rx, ry
from .clifford import (
    ALL_PULSES,
    CliffordElement,
    PauliOperator,
    PauliPulse,
    StabilizerState,
    clifford_from_circuit,
    compose,
)
from .symplectic import BinarySymplectic, random_symplectic, symplectic_inv, vec_mat
from .synth import one_qubit_table, synthesize

__all__ = [
    "BenchmarkConfig",
    "BenchmarkSequence",
    "FinalStep",
    "FinalStrategy",
    "Prediction",
    "SequenceFormatError",
    "Step",
    "expected_pulses_one_qubit",
    "generate_benchmark",
    "generate_one_qubit_sequence",
    "generate_sequence",
    "generate_step",
    "interleave",
    "predict_outcome",
    "read_sequences",
    "sequence_rng",
    "write_sequences",
]


class FinalStrategy(str, enum.Enum):
    FULL_INVERSE = "FULL_INVERSE"
    RANDOM_LOGICAL = "RANDOM_LOGICAL"
    RANDOM_JOINT_Z = "RANDOM_JOINT_Z"
    ONE_QUBIT = "ONE_QUBIT"


class SequenceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def sequence_rng(master_seed: int, seq_id: int) -> np.random.Generator:
    """Independent stream for generating sequence ``seq_id``."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(0, seq_id)))


@dataclass(frozen=True)
class BenchmarkConfig:
    n_qubits: int
    lengths: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    sequences_per_length: tuple[int, ...] = (50,) * 6
    runs_per_sequence: int = 100
    interleaved_gate: GateCircuit | None = None
    final_strategy: FinalStrategy = FinalStrategy.FULL_INVERSE
    master_seed: int = 0
    two_qubit_gate: str = "G"

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(v) for v in self.lengths))
        spl = self.sequences_per_length
        if isinstance(spl, int):
            spl = (spl,) * len(self.lengths)
        object.__setattr__(self, "sequences_per_length", tuple(int(v) for v in spl))
        object.__setattr__(self, "final_strategy", FinalStrategy(self.final_strategy))
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if not self.lengths or any(v < 1 for v in self.lengths):
            raise ValueError("lengths must be positive")
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be strictly increasing")
        if len(self.sequences_per_length) != len(self.lengths):
            raise ValueError("sequences_per_length must align with lengths")
        if any(v < 1 for v in self.sequences_per_length):
            raise ValueError("sequences_per_length entries must be positive")
        if self.runs_per_sequence < 1:
            raise ValueError("runs_per_sequence must be positive")
        if self.interleaved_gate is not None:
            if self.interleaved_gate.n_qubits != self.n_qubits:
                raise ValueError("interleaved gate acts on a different qubit count")
            clifford_from_circuit(self.interleaved_gate)
        if self.final_strategy is FinalStrategy.ONE_QUBIT and self.n_qubits != 1:
            raise ValueError("the one-qubit protocol needs n_qubits = 1")

    def layout(self) -> list[tuple[int, int]]:
        """``(seq_id, length)`` for every base sequence, in id order."""
        out = []
        for length, count in zip(self.lengths, self.sequences_per_length):
            out.extend([(len(out) + k, length) for k in range(count)])
        return out

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "lengths": list(self.lengths),
            "sequences_per_length": list(self.sequences_per_length),
            "runs_per_sequence": self.runs_per_sequence,
            "interleaved_gate": None if self.interleaved_gate is None else self.interleaved_gate.to_records(),
            "final_strategy": self.final_strategy.value,
            "master_seed": self.master_seed,
            "two_qubit_gate": self.two_qubit_gate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> BenchmarkConfig:
        d = dict(d)
        gate = d.get("interleaved_gate")
        if gate is not None:
            d["interleaved_gate"] = GateCircuit.from_records(d["n_qubits"], gate)
        return cls(**d)


@dataclass(frozen=True)
class Step:
    pulses: tuple[PauliPulse, ...]
    matrix: BinarySymplectic
    circuit: GateCircuit

    @property
    def pulse_circuit(self) -> GateCircuit:
        return GateCircuit(self.circuit.n_qubits, tuple(p.gate(q) for q, p in enumerate(self.pulses)))

    @property
    def full_circuit(self) -> GateCircuit:
        return self.pulse_circuit + self.circuit

    def to_record(self) -> dict:
        return {"pauli": [str(p) for p in self.pulses], "class": self.matrix.to_strings(),
                "circuit": self.circuit.to_records()}

    @classmethod
    def from_record(cls, n: int, rec: dict) -> Step:
        return cls(tuple(PauliPulse.from_string(s) for s in rec["pauli"]),
                   BinarySymplectic.from_strings(rec["class"]),
                   GateCircuit.from_records(n, rec["circuit"]))


@dataclass(frozen=True)
class FinalStep(Step):
    strategy: FinalStrategy = FinalStrategy.FULL_INVERSE
    draw: dict = field(default_factory=dict, compare=False)

    def to_record(self) -> dict:
        rec = super().to_record()
        rec["strategy"] = self.strategy.value
        rec["draw"] = self.draw
        return rec

    @classmethod
    def from_record(cls, n: int, rec: dict) -> FinalStep:
        base = Step.from_record(n, rec)
        return cls(base.pulses, base.matrix, base.circuit, FinalStrategy(rec["strategy"]), dict(rec.get("draw", {})))


@dataclass(frozen=True)
class Prediction:
    """Either all measured bits, or a subset ``mask`` with its parity ``(-1)**sum(bits)``."""

    bits: str | None = None
    mask: str | None = None
    parity: int | None = None

    def to_record(self):
        if self.bits is not None:
            return self.bits
        return {"mask": self.mask, "parity": self.parity}

    @classmethod
    def from_record(cls, rec) -> Prediction:
        if isinstance(rec, str):
            return cls(bits=rec)
        return cls(mask=rec["mask"], parity=int(rec["parity"]))

    def matches(self, bits: str) -> bool:
        if self.bits is not None:
            return bits == self.bits
        ones = sum(int(b) for b, m in zip(bits, self.mask) if m == "1")
        return (-1) ** ones == self.parity


@dataclass(frozen=True)
class BenchmarkSequence:
    id: int
    n_qubits: int
    steps: tuple[Step, ...]
    final: FinalStep
    interleaved: GateCircuit | None = None
    predicted: Prediction | None = None

    @property
    def length(self) -> int:
        return len(self.steps)

    def segments(self) -> list[tuple[str, GateCircuit]]:
        """Circuits in time order, tagged ``step``, ``interleaved`` or ``final``."""
        out = []
        for s in self.steps:
            out.append(("step", s.full_circuit))
            if self.interleaved is not None:
                out.append(("interleaved", self.interleaved))
        out.append(("final", self.final.full_circuit))
        return out

    def circuit(self) -> GateCircuit:
        total = GateCircuit(self.n_qubits)
        for _, c in self.segments():
            total = total + c
        return total

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "n": self.n_qubits,
            "len": self.length,
            "steps": [s.to_record() for s in self.steps],
            "interleaved": None if self.interleaved is None else self.interleaved.to_records(),
            "final": self.final.to_record(),
            "predict": self.predicted.to_record(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), separators=(",", ":"))

    @classmethod
    def from_record(cls, rec: dict) -> BenchmarkSequence:
        n = int(rec["n"])
        steps = tuple(Step.from_record(n, s) for s in rec["steps"])
        if len(steps) != int(rec["len"]):
            raise ValueError(f"len {rec['len']} does not match {len(steps)} steps")
        inter = rec.get("interleaved")
        return cls(
            id=int(rec["id"]),
            n_qubits=n,
            steps=steps,
            final=FinalStep.from_record(n, rec["final"]),
            interleaved=None if inter is None else GateCircuit.from_records(n, inter),
            predicted=Prediction.from_record(rec["predict"]),
        )


def _random_pulses(n: int, rng: np.random.Generator, options=ALL_PULSES) -> tuple[PauliPulse, ...]:
    return tuple(options[i] for i in rng.integers(0, len(options), size=n))


def generate_step(n: int, rng: np.random.Generator, two_qubit_gate: str = "G") -> Step:
    pulses = _random_pulses(n, rng)
    m = random_symplectic(n, rng)
    return Step(pulses, m, synthesize(m, two_qubit_gate))


def _gf2_inverse(a: np.ndarray) -> np.ndarray | None:
    n = a.shape[0]
    aug = np.concatenate([a % 2, np.eye(n, dtype=np.uint8)], axis=1).astype(np.uint8)
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r, col]), None)
        if piv is None:
            return None
        aug[[col, piv]] = aug[[piv, col]]
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] ^= aug[col]
    return aug[:, n:]


def _random_invertible(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        a = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if _gf2_inverse(a) is not None:
            return a


def _logical_class(a: np.ndarray) -> BinarySymplectic:
    n = a.shape[0]
    bits = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    bits[:n, :n] = a
    bits[n:, n:] = _gf2_inverse(a).T
    return BinarySymplectic.from_bits(bits)


def _local_class(classes: list[BinarySymplectic]) -> BinarySymplectic:
    """Block-diagonal embedding of one-qubit classes, qubit ``q`` from ``classes[q]``."""
    n = len(classes)
    bits = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for q, c in enumerate(classes):
        b = c.to_bits()
        for i in range(2):
            for j in range(2):
                bits[q + i * n, q + j * n] = b[i, j]
    return BinarySymplectic.from_bits(bits)


_ONE_QUBIT_CLASSES = sorted(one_qubit_table(), key=lambda m: m.key)
_Z_VEC = 0b01


def _joint_z_draw(n: int, rng: np.random.Generator) -> dict:
    r = random_symplectic(n, rng)
    return {"R": r.to_strings(), "element": int(rng.integers(0, 2**n - 1)),
            "local": [int(v) for v in rng.integers(0, 6, size=n)]}


def _joint_z_element(n: int, draw: dict) -> int:
    """Bits of the drawn stabilizer element after the random class."""
    r = BinarySymplectic.from_strings(draw["R"])
    z_rows = [vec_mat(1 << (n - 1 - q), r.rows) for q in range(n)]
    elements = []
    for m in range(1, 2**n):
        v = 0
        for q in range(n):
            if (m >> q) & 1:
                v ^= z_rows[q]
        elements.append(v)
    elements.sort()
    return elements[draw["element"]]


def _joint_z_mask(n: int, draw: dict) -> str:
    s = _joint_z_element(n, draw)
    return "".join(str(((s >> (2 * n - 1 - q)) | (s >> (n - 1 - q))) & 1) for q in range(n))


def _joint_z_target(n: int, draw: dict) -> BinarySymplectic:
    """Net class: the drawn random class, then locals sending one stabilizer to ``Z``-type."""
    r = BinarySymplectic.from_strings(draw["R"])
    s = _joint_z_element(n, draw)
    locals_ = []
    for q in range(n):
        x = (s >> (2 * n - 1 - q)) & 1
        z = (s >> (n - 1 - q)) & 1
        v = (x << 1) | z
        choice = draw["local"][q]
        if v == 0:
            locals_.append(_ONE_QUBIT_CLASSES[choice % 6])
        else:
            cands = [c for c in _ONE_QUBIT_CLASSES if vec_mat(v, c.rows) == _Z_VEC]
            locals_.append(cands[choice % 2])
    return r @ _local_class(locals_)


def _net_clifford(steps, interleaved: GateCircuit | None, n: int) -> CliffordElement:
    total = CliffordElement.identity(n)
    inter = None if interleaved is None else clifford_from_circuit(interleaved)
    for s in steps:
        total = compose(clifford_from_circuit(s.full_circuit), total)
        if inter is not None:
            total = compose(inter, total)
    return total


# one-qubit protocol: Paulis and Cliffords chosen from short lists
ONE_QUBIT_PAULIS = tuple(PauliPulse(a, 1) for a in "IXYZ")
ONE_QUBIT_CLIFFORDS = (rx(0, 1), rx(0, -1), ry(0, 1), ry(0, -1), Gate("ID", (0,)))


def _one_qubit_final(state: StabilizerState, draw: dict) -> Gate:
    g = state.generators[0]
    cands = [c for c in ONE_QUBIT_CLIFFORDS
             if vec_mat(g.vec, clifford_from_circuit(GateCircuit(1, (c,))).rows) == _Z_VEC]
    return cands[draw["choice"] % len(cands)]


def _build_final(n, steps, interleaved, pulses, strategy, draw, two_qubit_gate) -> FinalStep:
    net = _net_clifford(steps, interleaved, n)
    pulse_circ = GateCircuit(n, tuple(p.gate(q) for q, p in enumerate(pulses)))
    undo = symplectic_inv(compose(clifford_from_circuit(pulse_circ), net).symplectic)
    if strategy is FinalStrategy.FULL_INVERSE:
        m = undo
    elif strategy is FinalStrategy.RANDOM_LOGICAL:
        a = np.array([[int(c) for c in row] for row in draw["A"]], dtype=np.uint8)
        m = undo @ _logical_class(a)
    elif strategy is FinalStrategy.RANDOM_JOINT_Z:
        m = undo @ _joint_z_target(n, draw)
    elif strategy is FinalStrategy.ONE_QUBIT:
        state = StabilizerState.prepared(1).evolve(compose(clifford_from_circuit(pulse_circ), net))
        gate = _one_qubit_final(state, draw)
        circ = GateCircuit(1, (gate,))
        return FinalStep(pulses, clifford_from_circuit(circ).symplectic, circ, strategy, draw)
    else:
        raise ValueError(strategy)
    return FinalStep(pulses, m, synthesize(m, two_qubit_gate), strategy, draw)


def _draw_final(n: int, strategy: FinalStrategy, rng: np.random.Generator) -> tuple[tuple[PauliPulse, ...], dict]:
    # pulses are drawn first and independently of the inverting class
    if strategy is FinalStrategy.ONE_QUBIT:
        return _random_pulses(1, rng, ONE_QUBIT_PAULIS), {"choice": int(rng.integers(0, 2))}
    pulses = _random_pulses(n, rng)
    if strategy is FinalStrategy.RANDOM_LOGICAL:
        return pulses, {"A": ["".join(str(b) for b in row) for row in _random_invertible(n, rng)]}
    if strategy is FinalStrategy.RANDOM_JOINT_Z:
        return pulses, _joint_z_draw(n, rng)
    return pulses, {}


def predict_outcome(seq: BenchmarkSequence) -> Prediction:
    """Propagate the prepared state through every circuit of ``seq``."""
    state = StabilizerState.prepared(seq.n_qubits)
    for _, c in seq.segments():
        state = state.evolve_circuit(c)
    if seq.final.strategy is FinalStrategy.RANDOM_JOINT_Z:
        n = seq.n_qubits
        mask = _joint_z_mask(n, seq.final.draw)
        zvec = int(mask, 2)
        e = state.expectation(PauliOperator(n, zvec))
        if e == 0:
            raise AssertionError("joint-Z final step left the parity random")
        # eigenvalue of prod(-sigma_z) over the mask
        return Prediction(mask=mask, parity=e * (-1) ** mask.count("1"))
    bits = state.outcome_bits()
    if bits is None:
        raise AssertionError("final step did not produce a basis state")
    return Prediction(bits=bits)


def _assemble(seq_id, n, steps, final, interleaved) -> BenchmarkSequence:
    seq = BenchmarkSequence(seq_id, n, tuple(steps), final, interleaved)
    return BenchmarkSequence(seq_id, n, seq.steps, final, interleaved, predict_outcome(seq))


def generate_sequence(length: int, config: BenchmarkConfig, rng: np.random.Generator,
                      seq_id: int = 0) -> BenchmarkSequence:
    """One base sequence (no interleaved gate)."""
    if length < 1:
        raise ValueError("length must be at least 1")
    n = config.n_qubits
    if config.final_strategy is FinalStrategy.ONE_QUBIT:
        return generate_one_qubit_sequence(length, rng, seq_id)
    steps = [generate_step(n, rng, config.two_qubit_gate) for _ in range(length)]
    pulses, draw = _draw_final(n, config.final_strategy, rng)
    final = _build_final(n, steps, None, pulses, config.final_strategy, draw, config.two_qubit_gate)
    return _assemble(seq_id, n, steps, final, None)


def generate_one_qubit_sequence(length: int, rng: np.random.Generator, seq_id: int = 0) -> BenchmarkSequence:
    """One-qubit protocol: 4 Paulis and 5 Cliffords per step, deterministic ``Z`` at the end."""
    if length < 1:
        raise ValueError("length must be at least 1")
    steps = []
    for _ in range(length):
        pulses = _random_pulses(1, rng, ONE_QUBIT_PAULIS)
        circ = GateCircuit(1, (ONE_QUBIT_CLIFFORDS[int(rng.integers(0, 5))],))
        steps.append(Step(pulses, clifford_from_circuit(circ).symplectic, circ))
    pulses, draw = _draw_final(1, FinalStrategy.ONE_QUBIT, rng)
    final = _build_final(1, steps, None, pulses, FinalStrategy.ONE_QUBIT, draw, "G")
    return _assemble(seq_id, 1, steps, final, None)


def expected_pulses_one_qubit() -> tuple[Fraction, Fraction]:
    """Mean pi/2 pulses per Clifford and mean effective pulses per full step."""
    cliff = sum(Fraction(g.effective_pulses()) for g in ONE_QUBIT_CLIFFORDS) / len(ONE_QUBIT_CLIFFORDS)
    pauli = sum(Fraction(p.gate(0).effective_pulses()) for p in ONE_QUBIT_PAULIS) / len(ONE_QUBIT_PAULIS)
    return cliff, cliff + pauli


def interleave(seq: BenchmarkSequence, gate: GateCircuit | None, two_qubit_gate: str = "G") -> BenchmarkSequence:
    """Insert ``gate`` after every step (or strip with ``None``) and redo the final step.

    The final step reuses the stored random draws, so stripping an interleaved
    twin reproduces its base sequence.
    """
    n = seq.n_qubits
    if gate is not None:
        if gate.n_qubits != n:
            raise ValueError("gate acts on a different qubit count")
        clifford_from_circuit(gate)  # raises for non-Clifford gates
    f = seq.final
    final = _build_final(n, seq.steps, gate, f.pulses, f.strategy, f.draw, two_qubit_gate)
    return _assemble(seq.id, n, seq.steps, final, gate)


def _generate_one(args) -> tuple[BenchmarkSequence, BenchmarkSequence | None]:
    config, seq_id, length = args
    base = generate_sequence(length, config, sequence_rng(config.master_seed, seq_id), seq_id)
    twin = None
    if config.interleaved_gate is not None:
        twin = interleave(base, config.interleaved_gate, config.two_qubit_gate)
    return base, twin


def generate_benchmark(config: BenchmarkConfig, jobs: int = 1) -> tuple[list[BenchmarkSequence], list[BenchmarkSequence] | None]:
    """All base sequences and, with an interleaved gate, their twins (ordered by id)."""
    tasks = [(config, i, length) for i, length in config.layout()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            pairs = list(pool.map(_generate_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        pairs = [_generate_one(t) for t in tasks]
    base = [p[0] for p in pairs]
    twins = [p[1] for p in pairs] if config.interleaved_gate is not None else None
    return base, twins


def write_sequences(path, seqs) -> None:
    Path(path).write_text("".join(s.to_json() + "\n" for s in seqs))


def read_sequences(path) -> list[BenchmarkSequence]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(BenchmarkSequence.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, UnsupportedGateError) as exc:
            raise SequenceFormatError(str(exc), lineno) from exc
    return out
