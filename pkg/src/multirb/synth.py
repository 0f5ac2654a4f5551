"""Circuits for symplectic classes.

Two-qubit classes come from an exhaustive breadth-first table that minimizes
the number of two-qubit gates (``G`` or ``CNOT``); one-qubit gates are free in
that count.  Larger registers use column elimination with ``O(n^2)`` gates.
The average minimal two-qubit-gate count over all classes, ``C(n)``, is
computed exactly for ``n <= 3`` by a vectorized search over the enumerated
group.
"""
from __future__ import annotations

import functools
import itertools
import json
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circuit import Gate, GateCircuit, cnot, g_gate, rx, ry, rz
from .clifford import clifford_from_circuit, gate_clifford
from .symplectic import (
    MAX_ENUMERATION_QUBITS,
    BinarySymplectic,
    CapacityError,
    enumerate_symplectic,
    symplectic_mul,
    vec_mat,
)

__all__ = [
    "CostMetric",
    "SynthesisTable2Q",
    "TableEntry",
    "avg_two_qubit_cost",
    "build_table_2q",
    "cost_histogram",
    "gate_class",
    "one_qubit_table",
    "synthesize",
]

CostMetric = str  # "G" or "CNOT"
METRICS = ("G", "CNOT")


def _check_metric(metric: str):
    if metric not in METRICS:
        raise ValueError(f"two-qubit gate must be one of {METRICS}, got {metric!r}")


def _two_qubit_gate(metric: str, a: int = 0, b: int = 1) -> Gate:
    return g_gate(a, b) if metric == "G" else cnot(a, b)


@functools.lru_cache(maxsize=1024)
def gate_class(gate: Gate, n: int) -> BinarySymplectic:
    return gate_clifford(gate, n).symplectic


def _circuit_key(circuit: GateCircuit) -> tuple:
    return (circuit.effective_pulses(), circuit.serialized())


def _short_key(circuit: GateCircuit) -> tuple:
    # z rotations are free, so also prefer fewer gates
    return (circuit.effective_pulses(), len(circuit), circuit.serialized())


@functools.lru_cache(maxsize=None)
def one_qubit_table() -> dict[BinarySymplectic, GateCircuit]:
    """Fewest-pulse circuit on qubit 0 for each of the six one-qubit classes."""
    moves = [f(0, t) for f in (rx, ry, rz) for t in (1, -1)]
    best: dict[BinarySymplectic, GateCircuit] = {BinarySymplectic.identity(1): GateCircuit(1)}
    for length in (1, 2, 3):
        for gates in itertools.product(moves, repeat=length):
            circ = GateCircuit(1, gates)
            m = clifford_from_circuit(circ).symplectic
            if m not in best or _short_key(circ) < _short_key(best[m]):
                best[m] = circ
    assert len(best) == 6
    return best


@functools.lru_cache(maxsize=None)
def _local_classes(n: int) -> list[tuple[BinarySymplectic, GateCircuit]]:
    """All ``6**n`` products of one-qubit classes with their circuits."""
    singles = sorted(one_qubit_table().items(), key=lambda kv: kv[0].key)
    out = []
    for combo in itertools.product(singles, repeat=n):
        circ = GateCircuit(n)
        for q, (_, c1) in enumerate(combo):
            circ = circ + c1.remap({0: q}, n)
        out.append((clifford_from_circuit(circ).symplectic, circ))
    out.sort(key=lambda mc: mc[0].key)
    return out


@dataclass(frozen=True)
class TableEntry:
    index: int
    matrix: BinarySymplectic
    cost: int
    circuit: GateCircuit

    def to_record(self, metric: str = "G") -> dict:
        count_key = "g_count" if metric == "G" else "cnot_count"
        return {"index": self.index, "class": self.matrix.to_strings(), count_key: self.cost,
                "circuit": self.circuit.to_records()}


class SynthesisTable2Q:
    """Minimal two-qubit-gate circuits for all 720 two-qubit classes."""

    def __init__(self, metric: str, entries: list[TableEntry]):
        self.metric = metric
        self.entries = entries
        self._by_matrix = {e.matrix: e for e in entries}

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index: int) -> TableEntry:
        return self.entries[index]

    def lookup(self, m: BinarySymplectic) -> TableEntry:
        return self._by_matrix[m]

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(e.cost for e in self.entries).items()))

    def total_cost(self) -> int:
        return sum(e.cost for e in self.entries)

    def mean_cost(self) -> Fraction:
        return Fraction(self.total_cost(), len(self.entries))

    def cost_distribution(self) -> dict[int, Fraction]:
        return {k: Fraction(v, len(self.entries)) for k, v in self.histogram().items()}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_record(self.metric)) + "\n" for e in self.entries)


@functools.lru_cache(maxsize=None)
def build_table_2q(metric: CostMetric = "G") -> SynthesisTable2Q:
    """Breadth-first search over the 720 classes by two-qubit-gate count.

    Layer 0 holds the 36 local classes; layer ``k + 1`` appends one
    two-qubit gate and one local layer to every class of layer ``k``.  Among
    candidates for a class the witness with fewest pi/2 pulses wins, then the
    lexicographically smallest serialized circuit.
    """
    _check_metric(metric)
    n = 2
    universe = enumerate_symplectic(n)
    locals_ = _local_classes(n)
    two = gate_class(_two_qubit_gate(metric), n)
    best: dict[BinarySymplectic, tuple[int, GateCircuit]] = {}
    layer: dict[BinarySymplectic, GateCircuit] = {}
    for m, circ in locals_:
        layer[m] = circ
    for m, circ in layer.items():
        best[m] = (0, circ)
    cost = 0
    two_circ = GateCircuit(n, (_two_qubit_gate(metric),))
    while len(best) < len(universe):
        cost += 1
        nxt: dict[BinarySymplectic, GateCircuit] = {}
        for m in sorted(layer, key=lambda x: x.key):
            base = symplectic_mul(m, two)
            prefix = layer[m] + two_circ
            for lm, lcirc in locals_:
                target = symplectic_mul(base, lm)
                if target in best:
                    continue
                cand = prefix + lcirc
                old = nxt.get(target)
                if old is None or _circuit_key(cand) < _circuit_key(old):
                    nxt[target] = cand
        if not nxt:
            raise RuntimeError("search stalled before covering the group")
        for m, circ in nxt.items():
            best[m] = (cost, circ)
        layer = nxt
    entries = [TableEntry(i, m, *best[m]) for i, m in enumerate(universe)]
    return SynthesisTable2Q(metric, entries)


def _right_mul_table(b: BinarySymplectic) -> np.ndarray:
    return np.array([vec_mat(v, b.rows) for v in range(1 << (2 * b.n))], dtype=np.uint8)


@functools.lru_cache(maxsize=None)
def _cost_array(n: int, metric: str) -> np.ndarray:
    """Minimal two-qubit-gate count for every enumerated class, by index."""
    universe = enumerate_symplectic(n)
    local_gens = [_right_mul_table(gate_class(f(q), n)) for q in range(n) for f in (rx, rz)]
    pair_gens = [_right_mul_table(gate_class(_two_qubit_gate(metric, a, b), n))
                 for a, b in itertools.combinations(range(n), 2)]
    cost = np.full(len(universe), -1, dtype=np.int16)

    def expand(frontier: np.ndarray, tables, level: int) -> np.ndarray:
        rows = universe.rows[frontier]
        found = []
        for t in tables:
            idx = universe.indices_of_rows(t[rows])
            fresh = np.unique(idx[cost[idx] < 0])
            cost[fresh] = level
            found.append(fresh)
        return np.unique(np.concatenate(found)) if found else np.empty(0, dtype=np.int64)

    def close_locally(frontier: np.ndarray, level: int) -> np.ndarray:
        while len(frontier):
            frontier = expand(frontier, local_gens, level)
        return np.nonzero(cost == level)[0]

    start = universe.index(BinarySymplectic.identity(n))
    cost[start] = 0
    layer = close_locally(np.array([start]), 0)
    level = 0
    while (cost < 0).any():
        level += 1
        seeds = expand(layer, pair_gens, level)
        if not len(seeds):
            raise RuntimeError("search stalled before covering the group")
        layer = close_locally(seeds, level)
    cost.flags.writeable = False
    return cost


def cost_histogram(n: int, metric: CostMetric = "CNOT") -> dict[int, int]:
    """Number of classes at each minimal two-qubit-gate count, ``n <= 3``."""
    _check_metric(metric)
    if n > MAX_ENUMERATION_QUBITS:
        raise CapacityError(f"exhaustive cost search is limited to n <= {MAX_ENUMERATION_QUBITS}")
    if n == 1:
        return {0: 6}
    values, counts = np.unique(_cost_array(n, metric), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def avg_two_qubit_cost(n: int, metric: CostMetric = "CNOT") -> Fraction:
    """Exact average over all classes of the minimal two-qubit-gate count."""
    hist = cost_histogram(n, metric)
    total = sum(hist.values())
    return Fraction(sum(k * v for k, v in hist.items()), total)


@functools.lru_cache(maxsize=None)
def _cnot_via_g() -> GateCircuit:
    """Fewest-pulse circuit ``local, G, local`` in the class of ``CNOT(0, 1)``."""
    target = gate_class(cnot(0, 1), 2)
    g = gate_class(g_gate(0, 1), 2)
    locals_ = _local_classes(2)
    best = None
    for bm, bc in locals_:
        mid = symplectic_mul(bm, g)
        for am, ac in locals_:
            if symplectic_mul(mid, am) == target:
                cand = bc + GateCircuit(2, (g_gate(0, 1),)) + ac
                if best is None or _circuit_key(cand) < _circuit_key(best):
                    best = cand
    return best


def _eliminate(m: BinarySymplectic) -> list[Gate]:
    """Gates whose right action reduces ``m`` to the identity.

    Every gate used is an involution at the class level, so the reversed
    list realizes ``m`` itself.
    """
    n = m.n
    nn = 2 * n
    rows = list(m.rows)
    ops: list[Gate] = []

    def xb(r, j):
        return (r >> (nn - 1 - j)) & 1

    def zb(r, j):
        return (r >> (n - 1 - j)) & 1

    def apply(gate):
        b = gate_class(gate, n).rows
        rows[:] = [vec_mat(r, b) for r in rows]
        ops.append(gate)

    for i in range(n):
        # image of X_i -> X_i
        for j in range(i + 1, n):
            r = rows[i]
            if zb(r, j):
                apply(rz(j) if xb(r, j) else ry(j))
        r = rows[i]
        if not xb(r, i):
            if zb(r, i):
                apply(ry(i))
            else:
                j = next(j for j in range(i + 1, n) if xb(rows[i], j))
                apply(cnot(j, i))
        for j in range(i + 1, n):
            if xb(rows[i], j):
                apply(cnot(i, j))
        if zb(rows[i], i):
            apply(rz(i))
        # image of Z_i -> Z_i without disturbing X_i
        for j in range(i + 1, n):
            r = rows[n + i]
            if xb(r, j):
                if zb(r, j):
                    apply(rz(j))
                apply(ry(j))
        for j in range(i + 1, n):
            if zb(rows[n + i], j):
                apply(cnot(j, i))
        if xb(rows[n + i], i):
            apply(rx(i))
    assert BinarySymplectic(n, tuple(rows)).is_identity()
    return ops


def synthesize(m: BinarySymplectic, two_qubit_gate: CostMetric = "G") -> GateCircuit:
    """A circuit whose class is ``m``.

    One and two qubits use the minimal tables; larger registers use column
    elimination, rewriting each CNOT through ``G`` when requested.
    """
    _check_metric(two_qubit_gate)
    n = m.n
    if n == 1:
        return one_qubit_table()[m]
    if n == 2:
        return build_table_2q(two_qubit_gate).lookup(m).circuit
    gates = list(reversed(_eliminate(m)))
    if two_qubit_gate == "CNOT":
        return GateCircuit(n, gates)
    rewrite = _cnot_via_g()
    out = GateCircuit(n)
    for g in gates:
        if g.name == "CNOT":
            out = out + rewrite.remap({0: g.qubits[0], 1: g.qubits[1]}, n)
        else:
            out = out + GateCircuit(n, (g,))
    return out
