import json
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from conftest import down_state, oracle_unitary, outcome_string
from scipy.stats import chisquare

from multirb.benchgen import (
    BenchmarkConfig,
    BenchmarkSequence,
    FinalStep,
    FinalStrategy,
    Prediction,
    SequenceFormatError,
    Step,
    expected_pulses_one_qubit,
    generate_benchmark,
    generate_one_qubit_sequence,
    generate_sequence,
    generate_step,
    interleave,
    read_sequences,
    sequence_rng,
    write_sequences,
)
from multirb.circuit import Gate, GateCircuit, cnot, g_gate, idle
from multirb.clifford import ALL_PULSES, PauliPulse, clifford_from_circuit
from multirb.symplectic import BinarySymplectic, enumerate_symplectic

STRATEGIES = ["FULL_INVERSE", "RANDOM_LOGICAL", "RANDOM_JOINT_Z"]


def success_probability(seq: BenchmarkSequence) -> float:
    n = seq.n_qubits
    psi = oracle_unitary(seq.circuit()) @ down_state(n)
    probs = np.abs(psi) ** 2
    return sum(p for i, p in enumerate(probs) if seq.predicted.matches(outcome_string(i, n)))


def test_step_pulses_uniform_and_classes_uniform():
    rng = np.random.default_rng(41)
    lst = enumerate_symplectic(2)
    pulse_counts = np.zeros((2, 8))
    class_counts = np.zeros(720)
    index = {p: k for k, p in enumerate(ALL_PULSES)}
    draws = 80_000
    for _ in range(draws):
        step = generate_step(2, rng)
        for q, p in enumerate(step.pulses):
            pulse_counts[q, index[p]] += 1
        class_counts[lst.index(step.matrix)] += 1
    sigma = np.sqrt(draws * (1 / 8) * (7 / 8))
    assert np.all(np.abs(pulse_counts - draws / 8) < 5 * sigma)
    assert chisquare(class_counts).pvalue > 1e-3


def test_average_g_per_step():
    rng = np.random.default_rng(42)
    counts = [generate_step(2, rng).circuit.count("G") for _ in range(10_000)]
    assert abs(np.mean(counts) - 1.5) < 0.02


def test_step_circuit_realizes_class():
    rng = np.random.default_rng(43)
    for n in (1, 2, 3):
        for _ in range(20):
            step = generate_step(n, rng)
            assert clifford_from_circuit(step.circuit).symplectic == step.matrix
            assert clifford_from_circuit(step.full_circuit).symplectic == step.matrix


def identity_sequence(n=2):
    cfg = BenchmarkConfig(n, lengths=(1,), sequences_per_length=(1,))
    seq = generate_sequence(1, cfg, np.random.default_rng(0))
    ident = PauliPulse("I")
    step = Step((ident,) * n, BinarySymplectic.identity(n), GateCircuit(n))
    final = FinalStep((ident,) * n, BinarySymplectic.identity(n), GateCircuit(n), FinalStrategy.FULL_INVERSE, {})
    return interleave(replace(seq, steps=(step,), final=final), None)


def test_trivial_sequence_predicts_all_down():
    seq = identity_sequence()
    assert seq.final.matrix.is_identity()
    assert len(seq.final.circuit) == 0
    assert seq.predicted == Prediction(bits="00")


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_noiseless_prediction_sound(strategy):
    cfg = BenchmarkConfig(2, lengths=(1, 2, 3, 4, 5, 6), sequences_per_length=(34,) * 6, final_strategy=strategy,
                          master_seed=7)
    base, _ = generate_benchmark(cfg)
    assert len(base) == 204
    for seq in base:
        assert abs(success_probability(seq) - 1) < 1e-9


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("strategy", STRATEGIES)
def test_prediction_sound_other_sizes(n, strategy):
    cfg = BenchmarkConfig(n, lengths=(1, 4), sequences_per_length=(5, 5), final_strategy=strategy, master_seed=8)
    for seq in generate_benchmark(cfg)[0]:
        assert abs(success_probability(seq) - 1) < 1e-9


def test_joint_z_parity_prediction():
    cfg = BenchmarkConfig(3, lengths=(2,), sequences_per_length=(30,), final_strategy="RANDOM_JOINT_Z")
    masks = set()
    for seq in generate_benchmark(cfg)[0]:
        pred = seq.predicted
        assert pred.bits is None and pred.parity in (1, -1)
        masks.add(pred.mask)
        psi = oracle_unitary(seq.circuit()) @ down_state(3)
        for i, p in enumerate(np.abs(psi) ** 2):
            if p > 1e-9:
                bits = outcome_string(i, 3)
                ones = sum(int(b) for b, m in zip(bits, pred.mask) if m == "1")
                assert (-1) ** ones == pred.parity
    assert len(masks) > 3


def test_logical_strategy_keeps_basis_states():
    cfg = BenchmarkConfig(3, lengths=(3,), sequences_per_length=(10,), final_strategy="RANDOM_LOGICAL")
    preds = {s.predicted.bits for s in generate_benchmark(cfg)[0]}
    assert all(p is not None for p in preds)
    assert len(preds) > 1


def test_interleaving_identity_keeps_prediction():
    cfg = BenchmarkConfig(2, lengths=(3,), sequences_per_length=(10,))
    for seq in generate_benchmark(cfg)[0]:
        twin = interleave(seq, GateCircuit(2, (idle(0),)))
        assert twin.predicted == seq.predicted
        assert twin.length == seq.length


def test_interleaved_twins():
    gate = GateCircuit(2, (g_gate(0, 1),))
    cfg = BenchmarkConfig(2, lengths=(1, 2, 3, 4, 5), sequences_per_length=(20,) * 5, interleaved_gate=gate)
    base, twins = generate_benchmark(cfg)
    assert len(twins) == 100
    for b, t in zip(base, twins):
        assert t.steps == b.steps and t.id == b.id
        assert t.interleaved == gate
        assert t.final.pulses == b.final.pulses
        assert abs(success_probability(t) - 1) < 1e-9
        assert interleave(t, None).to_json() == b.to_json()
    assert sum(t.circuit().count("G") - b.circuit().count("G") for b, t in zip(base, twins)) != 0


def test_interleave_rejects_non_clifford():
    cfg = BenchmarkConfig(1, lengths=(1,), sequences_per_length=(1,))
    seq = generate_benchmark(cfg)[0][0]
    from multirb.circuit import UnsupportedGateError

    with pytest.raises(UnsupportedGateError):
        interleave(seq, GateCircuit(1, (Gate("RX", (0,), angle=0.1),)))


def test_seed_determinism(tmp_path):
    cfg = BenchmarkConfig(2, lengths=(1, 2), sequences_per_length=(4, 4), interleaved_gate=GateCircuit(2, (cnot(0, 1),)),
                          master_seed=99)
    a, at = generate_benchmark(cfg)
    b, bt = generate_benchmark(cfg, jobs=2)
    write_sequences(tmp_path / "a.jsonl", a + at)
    write_sequences(tmp_path / "b.jsonl", b + bt)
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    other = generate_benchmark(replace(cfg, master_seed=100))[0]
    assert [s.to_json() for s in other] != [s.to_json() for s in a]


def test_sequence_streams_independent_of_layout():
    cfg = BenchmarkConfig(2, lengths=(2,), sequences_per_length=(3,), master_seed=5)
    seqs = generate_benchmark(cfg)[0]
    again = generate_sequence(2, cfg, sequence_rng(5, 2), 2)
    assert again.to_json() == seqs[2].to_json()


def test_file_round_trip(tmp_path):
    cfg = BenchmarkConfig(2, lengths=(1, 2), sequences_per_length=(2, 2), final_strategy="RANDOM_JOINT_Z")
    seqs = generate_benchmark(cfg)[0]
    path = tmp_path / "s.jsonl"
    write_sequences(path, seqs)
    back = read_sequences(path)
    assert [s.to_json() for s in back] == [s.to_json() for s in seqs]
    rec = json.loads(path.read_text().splitlines()[0])
    assert set(rec) == {"id", "n", "len", "steps", "interleaved", "final", "predict"}
    assert set(rec["steps"][0]) == {"pauli", "class", "circuit"}
    assert set(rec["predict"]) == {"mask", "parity"}


def test_malformed_file_reports_line(tmp_path):
    cfg = BenchmarkConfig(1, lengths=(1,), sequences_per_length=(1,))
    good = generate_benchmark(cfg)[0][0].to_json()
    path = tmp_path / "bad.jsonl"
    path.write_text(good + "\n" + "{not json\n")
    with pytest.raises(SequenceFormatError) as info:
        read_sequences(path)
    assert info.value.line == 2


def test_config_validation():
    with pytest.raises(ValueError):
        BenchmarkConfig(2, lengths=(2, 1), sequences_per_length=(1, 1))
    with pytest.raises(ValueError):
        BenchmarkConfig(2, lengths=(1, 2), sequences_per_length=(1,))
    with pytest.raises(ValueError):
        BenchmarkConfig(2, runs_per_sequence=0)
    cfg = BenchmarkConfig(2, lengths=(1, 2), sequences_per_length=3)
    assert cfg.sequences_per_length == (3, 3)
    assert cfg.layout() == [(0, 1), (1, 1), (2, 1), (3, 2), (4, 2), (5, 2)]
    assert BenchmarkConfig.from_dict(cfg.to_dict()) == cfg


def test_one_qubit_expectations():
    per_clifford, per_step = expected_pulses_one_qubit()
    assert per_clifford == Fraction(4, 5)
    assert per_step == Fraction(9, 5)
    rng = np.random.default_rng(44)
    seqs = [generate_one_qubit_sequence(10, rng) for _ in range(400)]
    cliff = np.mean([s.circuit.effective_pulses() for q in seqs for s in q.steps])
    full = np.mean([s.full_circuit.effective_pulses() for q in seqs for s in q.steps])
    assert abs(cliff - 0.8) < 0.05 and abs(full - 1.8) < 0.1


def test_one_qubit_sequences_noiseless():
    rng = np.random.default_rng(45)
    for length in range(1, 8):
        for _ in range(10):
            seq = generate_one_qubit_sequence(length, rng)
            assert abs(success_probability(seq) - 1) < 1e-9
            assert seq.final.circuit.gates[0].name in ("RX", "RY", "ID")
    cfg = BenchmarkConfig(1, lengths=(1, 2), sequences_per_length=(3, 3), final_strategy="ONE_QUBIT")
    assert len(generate_benchmark(cfg)[0]) == 6
