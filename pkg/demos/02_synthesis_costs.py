"""How many two-qubit gates a random Clifford step needs."""
import argparse

from multirb.symplectic import BinarySymplectic
from multirb.synth import avg_two_qubit_cost, build_table_2q, cost_histogram, synthesize


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--three", action="store_true", help="also compute the three-qubit average (slower)")
    args = ap.parse_args()

    table = build_table_2q("G")
    print("minimal G counts over 720 classes:", table.histogram())
    print("mean G per step:", table.mean_cost())
    print("CNOT average for two qubits:", avg_two_qubit_cost(2, "CNOT"))

    m = BinarySymplectic.from_strings(["0101", "0111", "1100", "1000"])
    print("\nminimal circuit for", m.to_strings())
    for g in synthesize(m, "G"):
        print("  ", g.to_record())

    if args.three:
        c3 = avg_two_qubit_cost(3, "CNOT")
        print(f"\nthree-qubit CNOT average: {c3} = {float(c3):.4f}")
        print("histogram:", cost_histogram(3, "CNOT"))


if __name__ == "__main__":
    main()
