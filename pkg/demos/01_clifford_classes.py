"""Symplectic classes of two-qubit Clifford circuits.

Builds the example circuit made of quarter turns and two phase gates, prints
its tableau and binary class, and checks it against the enumerated group.
"""
from multirb.circuit import GateCircuit, g_gate, rx, ry
from multirb.clifford import PauliOperator, class_of, clifford_from_circuit, conjugate_pauli
from multirb.symplectic import enumerate_symplectic, group_order


def main():
    for n in (1, 2):
        print(f"n={n}: {len(enumerate_symplectic(n))} classes (group order formula gives {group_order(n)})")
    print(f"n=3: {group_order(3)} classes")

    circ = GateCircuit(2, (rx(1), g_gate(0, 1), rx(0), ry(1), g_gate(0, 1), rx(0), ry(1)))
    element = clifford_from_circuit(circ)
    m = class_of(element)
    print("\ncircuit:", [g.to_record() for g in circ])
    print("class rows (x|z):", m.to_strings())
    print("index in sorted enumeration:", enumerate_symplectic(2).index(m))
    for label in ("+XI", "+IX", "+ZI", "+IZ"):
        img = conjugate_pauli(element, PauliOperator.from_string(label))
        print(f"  {label} -> {img}")


if __name__ == "__main__":
    main()
