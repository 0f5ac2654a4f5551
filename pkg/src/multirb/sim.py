"""Monte Carlo execution of benchmark sequences under noise.

Two engines share one :class:`NoiseModel`:

``stabilizer``
    Pauli-channel noise only.  Each noise event applies, with probability
    ``d``, a uniformly random Pauli (identity included) to the affected
    qubits.  Since everything else is Clifford, an event only flips the
    signs of the stabilizer generators it anticommutes with, so runs are
    simulated in bulk by tracking those sign flips.

``dense``
    Density-matrix propagation for up to three qubits.  Gives the exact
    success probability, supports coherent over-rotation, and is used as an
    oracle for the stabilizer engine.

Noise placement: ``step_depol`` after every random step, ``interleaved_gate_depol``
after every inserted gate, ``per_gate_depol`` after each elementary gate of
the named kind (on that gate's qubits), and ``prep_meas_error`` once just
before measurement.  ``readout_flip`` flips each measured bit independently.
"""
from __future__ import annotations

import csv
import functools
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .benchgen import BenchmarkConfig, BenchmarkSequence, generate_benchmark
from .circuit import SIGMA, embed, gate_unitary
from .clifford import StabilizerState, gate_clifford
from .symplectic import CapacityError, vec_mat

__all__ = [
    "BenchmarkResult",
    "NoiseModel",
    "RunRecord",
    "SimResult",
    "UnsupportedNoiseError",
    "depolarizing_probability",
    "read_results",
    "run_benchmark",
    "simulate_dense",
    "simulate_sequences",
    "simulate_stabilizer",
    "simulation_rng",
    "success_probability_dense",
    "write_results",
]

MAX_DENSE_QUBITS = 3
SETS = ("base", "interleaved")


class UnsupportedNoiseError(ValueError):
    """Noise that the chosen engine cannot represent."""


def depolarizing_probability(eps: float, k: int) -> float:
    """Depolarizing probability on ``k`` qubits for average error ``eps``."""
    return 2**k * eps / (2**k - 1)


@dataclass(frozen=True)
class NoiseModel:
    step_depol: float = 0.0
    prep_meas_error: float = 0.0
    interleaved_gate_depol: float | None = None
    per_gate_depol: dict = field(default_factory=dict)
    readout_flip: float = 0.0
    coherent_overrotation: float = 0.0

    def __post_init__(self):
        probs = [self.step_depol, self.prep_meas_error, self.readout_flip]
        if self.interleaved_gate_depol is not None:
            probs.append(self.interleaved_gate_depol)
        probs.extend(self.per_gate_depol.values())
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")

    __hash__ = None  # holds a dict

    @property
    def is_pauli_channel(self) -> bool:
        return self.coherent_overrotation == 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> NoiseModel:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown noise fields {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class RunRecord:
    seq_id: int
    length: int
    runs: int
    successes: int
    set: str = "base"

    def __post_init__(self):
        if not 0 <= self.successes <= self.runs:
            raise ValueError(f"successes {self.successes} outside 0..{self.runs}")
        if self.set not in SETS:
            raise ValueError(f"set must be one of {SETS}")

    @property
    def fidelity(self) -> float:
        return self.successes / self.runs


@dataclass(frozen=True)
class SimResult:
    record: RunRecord
    p_success: float | None = None


def simulation_rng(master_seed: int, set_name: str, seq_id: int) -> np.random.Generator:
    key = (1, SETS.index(set_name), seq_id)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


# noise events: (depolarizing probability, qubits) placed after a gate or segment
def _segment_events(seq: BenchmarkSequence, noise: NoiseModel):
    """Yield ``(gate_or_None, events)`` in time order; ``None`` marks a segment end."""
    n = seq.n_qubits
    d_step = depolarizing_probability(noise.step_depol, n)
    d_inter = None if noise.interleaved_gate_depol is None else depolarizing_probability(noise.interleaved_gate_depol, n)
    every = tuple(range(n))
    for kind, circ in seq.segments():
        for g in circ:
            ev = []
            eps = noise.per_gate_depol.get(g.name)
            if eps:
                ev.append((depolarizing_probability(eps, len(g.qubits)), g.qubits))
            yield g, ev
        ev = []
        if kind == "step" and d_step:
            ev.append((d_step, every))
        elif kind == "interleaved" and d_inter:
            ev.append((d_inter, every))
        elif kind == "final" and noise.prep_meas_error:
            ev.append((depolarizing_probability(noise.prep_meas_error, n), every))
        yield None, ev


def _outcome_matrix(seq: BenchmarkSequence) -> np.ndarray:
    """Which final generators enter each predicted quantity (one column per quantity)."""
    n = seq.n_qubits
    state = StabilizerState.prepared(n)
    for _, c in seq.segments():
        state = state.evolve_circuit(c)
    pred = seq.predicted
    if pred.bits is not None:
        targets = [1 << (n - 1 - q) for q in range(n)]
    else:
        targets = [int(pred.mask, 2)]
    out = np.zeros((n, len(targets)), dtype=np.uint8)
    for k, t in enumerate(targets):
        idx = state.decompose(t)
        if idx is None:
            raise AssertionError("predicted quantity is not stabilized")
        out[idx, k] = 1
    return out


def _readout_mask(seq: BenchmarkSequence) -> np.ndarray:
    """How each qubit's readout flip enters the predicted quantities."""
    n = seq.n_qubits
    if seq.predicted.bits is not None:
        return np.eye(n, dtype=np.uint8)
    return np.array([[int(c)] for c in seq.predicted.mask], dtype=np.uint8)


def simulate_stabilizer(seq: BenchmarkSequence, noise: NoiseModel, runs: int,
                        rng: np.random.Generator, set_name: str = "base") -> RunRecord:
    if not noise.is_pauli_channel:
        raise UnsupportedNoiseError("the stabilizer engine supports Pauli-channel noise only")
    n = seq.n_qubits
    nn = 2 * n
    gens = [1 << (n - 1 - q) for q in range(n)]  # Z_i bits of the prepared generators
    flips = np.zeros((runs, n), dtype=np.uint8)
    for gate, events in _segment_events(seq, noise):
        if gate is not None:
            rows = gate_clifford(gate, n).rows
            gens = [vec_mat(g, rows) for g in gens]
        for d, qubits in events:
            hit = rng.random(runs) < d
            k = len(qubits)
            ex = rng.integers(0, 2, size=(runs, k), dtype=np.uint8)
            ez = rng.integers(0, 2, size=(runs, k), dtype=np.uint8)
            gx = np.array([[(g >> (nn - 1 - q)) & 1 for q in qubits] for g in gens], dtype=np.uint8)
            gz = np.array([[(g >> (n - 1 - q)) & 1 for q in qubits] for g in gens], dtype=np.uint8)
            anti = (ex.astype(np.int64) @ gz.T + ez.astype(np.int64) @ gx.T) & 1
            flips ^= anti.astype(np.uint8) * hit[:, None].astype(np.uint8)
    wrong = (flips.astype(np.int64) @ _outcome_matrix(seq)) & 1
    if noise.readout_flip:
        ro = (rng.random((runs, n)) < noise.readout_flip).astype(np.int64)
        wrong ^= (ro @ _readout_mask(seq)) & 1
    successes = int(np.count_nonzero(~wrong.any(axis=1)))
    return RunRecord(seq.id, seq.length, runs, successes, set_name)


@functools.lru_cache(maxsize=64)
def _pauli_unitaries(qubits: tuple[int, ...], n: int) -> tuple[np.ndarray, ...]:
    out = []
    for letters in itertools.product("IXYZ", repeat=len(qubits)):
        local = functools.reduce(np.kron, [SIGMA[c] for c in letters])
        out.append(embed(local, qubits, n))
    return tuple(out)


def _depolarize(rho: np.ndarray, d: float, qubits: tuple[int, ...], n: int) -> np.ndarray:
    paulis = _pauli_unitaries(tuple(qubits), n)
    twirled = sum(p @ rho @ p.conj().T for p in paulis) / len(paulis)
    return (1 - d) * rho + d * twirled


def _outcome_bits(index: int, n: int) -> str:
    # basis index bit 0 is up, which is outcome "1"
    return "".join("0" if c == "1" else "1" for c in format(index, f"0{n}b"))


def success_probability_dense(seq: BenchmarkSequence, noise: NoiseModel) -> float:
    """Exact probability that a run of ``seq`` matches its prediction."""
    n = seq.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense simulation is limited to n <= {MAX_DENSE_QUBITS}")
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[dim - 1, dim - 1] = 1.0  # all qubits down
    for gate, events in _segment_events(seq, noise):
        if gate is not None:
            u = gate_unitary(gate, n, noise.coherent_overrotation)
            rho = u @ rho @ u.conj().T
        for d, qubits in events:
            rho = _depolarize(rho, d, qubits, n)
    probs = np.real(np.diag(rho))
    if abs(np.trace(rho) - 1) > 1e-12 or probs.min() < -1e-12:
        raise AssertionError("density matrix lost normalization or positivity")
    f = noise.readout_flip
    total = 0.0
    for i in range(dim):
        true_bits = _outcome_bits(i, n)
        for j in range(dim):
            seen = _outcome_bits(j, n)
            if not seq.predicted.matches(seen):
                continue
            k = sum(a != b for a, b in zip(true_bits, seen))
            total += probs[i] * f**k * (1 - f) ** (n - k)
    return float(min(max(total, 0.0), 1.0))


def simulate_dense(seq: BenchmarkSequence, noise: NoiseModel, runs: int,
                   rng: np.random.Generator, set_name: str = "base") -> SimResult:
    p = success_probability_dense(seq, noise)
    successes = int(rng.binomial(runs, p))
    return SimResult(RunRecord(seq.id, seq.length, runs, successes, set_name), p)


ENGINES = ("stabilizer", "dense")


def _simulate_one(args) -> RunRecord:
    seq, noise, runs, master_seed, set_name, engine = args
    rng = simulation_rng(master_seed, set_name, seq.id)
    if engine == "dense":
        return simulate_dense(seq, noise, runs, rng, set_name).record
    return simulate_stabilizer(seq, noise, runs, rng, set_name)


def simulate_sequences(seqs, noise: NoiseModel, runs: int, master_seed: int, set_name: str = "base",
                       engine: str = "stabilizer", jobs: int = 1) -> list[RunRecord]:
    """Simulate every sequence with its own derived stream; output order follows ``seqs``."""
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    if engine == "stabilizer" and not noise.is_pauli_channel:
        raise UnsupportedNoiseError("the stabilizer engine supports Pauli-channel noise only")
    tasks = [(s, noise, runs, master_seed, set_name, engine) for s in seqs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_simulate_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_simulate_one(t) for t in tasks]


@dataclass
class BenchmarkResult:
    config: BenchmarkConfig
    base_sequences: list[BenchmarkSequence]
    interleaved_sequences: list[BenchmarkSequence] | None
    base: list[RunRecord]
    interleaved: list[RunRecord] | None

    @property
    def records(self) -> list[RunRecord]:
        return self.base + (self.interleaved or [])


def run_benchmark(config: BenchmarkConfig, noise: NoiseModel, engine: str = "stabilizer",
                  jobs: int = 1) -> BenchmarkResult:
    """Generate both sequence sets and simulate them, deterministically in the master seed."""
    base_seqs, twins = generate_benchmark(config, jobs)
    runs = config.runs_per_sequence
    base = simulate_sequences(base_seqs, noise, runs, config.master_seed, "base", engine, jobs)
    inter = None
    if twins is not None:
        inter = simulate_sequences(twins, noise, runs, config.master_seed, "interleaved", engine, jobs)
    return BenchmarkResult(config, base_seqs, twins, base, inter)


RESULTS_HEADER = ["set", "length", "seq_id", "runs", "successes"]


def write_results(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for r in records:
            w.writerow([r.set, r.length, r.seq_id, r.runs, r.successes])


class ResultsFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def read_results(path) -> list[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise ResultsFormatError(f"expected header {','.join(RESULTS_HEADER)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                s, length, seq_id, runs, succ = row
                out.append(RunRecord(int(seq_id), int(length), int(runs), int(succ), s))
            except ValueError as exc:
                raise ResultsFormatError(str(exc), lineno) from exc
    return out
