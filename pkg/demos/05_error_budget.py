"""Where the error per step comes from.

Splits a two-qubit step error into gate and pulse contributions, predicts the
spread of per-sequence fidelities caused by varying gate counts, and compares
that prediction with a simulation in which only the phase gates are noisy on
top of a per-step error.
"""
import numpy as np

from multirb.analysis import aggregate, chi_square_pvalue, fit_decay, linearized_epo_estimate, scatter_prediction
from multirb.benchgen import BenchmarkConfig, expected_pulses_one_qubit
from multirb.sim import NoiseModel, run_benchmark
from multirb.synth import build_table_2q


def main():
    _, per_step = expected_pulses_one_qubit()
    e1, estimate = linearized_epo_estimate(0.0085, float(per_step), 0.069, 1.5, 6.5)
    print(f"per-pulse error {e1:.4f}; linearized two-qubit step error {estimate:.3f}")
    print(f"p-value of chi2 = 9.48 on 4 dof: {chi_square_pvalue(9.48, 4):.4f}")

    cfg = BenchmarkConfig(2, lengths=(1, 2, 3, 4, 5, 6), sequences_per_length=45, master_seed=3)
    noise = NoiseModel(step_depol=0.08, prep_meas_error=0.086, per_gate_depol={"G": 0.069})
    points = aggregate(run_benchmark(cfg, noise).base)
    fit = fit_decay(points, 2)
    table = build_table_2q("G")
    print("\nlength  measured SD  predicted SD")
    for p in points:
        sd = float(np.std(p.fidelities, ddof=1))
        print(f"{p.length:6d}  {sd:.4f}       {scatter_prediction(p.length, table, fit, 100, 0.069):.4f}")


if __name__ == "__main__":
    main()
