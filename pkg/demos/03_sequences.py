"""Generate benchmark sequences and check their predicted outcomes.

Each final-step strategy is exercised once; the noiseless success
probability is computed exactly with the dense engine.
"""
import json

from multirb.benchgen import BenchmarkConfig, generate_benchmark
from multirb.circuit import GateCircuit, g_gate
from multirb.sim import NoiseModel, success_probability_dense


def main():
    for strategy in ("FULL_INVERSE", "RANDOM_LOGICAL", "RANDOM_JOINT_Z"):
        cfg = BenchmarkConfig(2, lengths=(1, 3, 6), sequences_per_length=4, final_strategy=strategy, master_seed=1)
        base, _ = generate_benchmark(cfg)
        worst = min(success_probability_dense(s, NoiseModel()) for s in base)
        preds = sorted({json.dumps(s.predicted.to_record(), sort_keys=True) for s in base})
        print(f"{strategy:15s} {len(base)} sequences, min noiseless success {worst:.3f}, predictions {preds}")

    cfg = BenchmarkConfig(2, lengths=(2,), sequences_per_length=1, master_seed=1,
                          interleaved_gate=GateCircuit(2, (g_gate(0, 1),)))
    base, twins = generate_benchmark(cfg)
    print("\nbase sequence record:")
    print(base[0].to_json())
    print("interleaved twin, gates per segment:")
    for kind, circ in twins[0].segments():
        print(f"  {kind:12s} {len(circ)} gates")


if __name__ == "__main__":
    main()
