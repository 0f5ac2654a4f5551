"""Clifford group elements as signed-Pauli tableaus.

A :class:`PauliOperator` is ``i**phase`` times a tensor product of the
Hermitian letters ``I, X, Y, Z``; its bits use the same packed ``(x | z)``
layout as :mod:`multirb.symplectic`.  A :class:`CliffordElement` stores the
conjugation images of ``X_1..X_n, Z_1..Z_n`` (each with sign ``+-1``); global
phase is not tracked.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

from .circuit import Gate, GateCircuit, UnsupportedGateError
from .symplectic import BinarySymplectic, DimensionError, symplectic_inv, symplectic_product

__all__ = [
    "CliffordElement",
    "PauliOperator",
    "PauliPulse",
    "StabilizerState",
    "class_of",
    "clifford_from_circuit",
    "compose",
    "conjugate_pauli",
    "gate_clifford",
    "inverse",
]

_LETTERS = "IZXY"  # index = 2 * x + z


def _split(v: int, n: int) -> tuple[int, int]:
    return v >> n, v & ((1 << n) - 1)


def _product_phase(a: int, b: int, n: int) -> int:
    """Exponent ``f`` (mod 4) with ``sigma_a sigma_b = i**f sigma_(a^b)``."""
    mask = (1 << n) - 1
    ax, az = _split(a, n)
    bx, bz = _split(b, n)
    nax, naz, nbx, nbz = ~ax & mask, ~az & mask, ~bx & mask, ~bz & mask
    a_x, a_z, a_y = ax & naz, nax & az, ax & az
    # XY = iZ, ZX = iY, YZ = iX and the reverse orders give -i
    plus = (a_x & bx & bz) | (a_z & bx & nbz) | (a_y & nbx & bz)
    minus = (a_x & nbx & bz) | (a_z & bx & bz) | (a_y & bx & nbz)
    return (plus.bit_count() - minus.bit_count()) % 4


@dataclass(frozen=True)
class PauliOperator:
    n: int
    vec: int
    phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n, 0, 0)

    @classmethod
    def from_bits(cls, x: list[int], z: list[int], phase: int = 0) -> PauliOperator:
        n = len(x)
        v = 0
        for b in list(x) + list(z):
            v = (v << 1) | (int(b) & 1)
        return cls(n, v, phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> PauliOperator:
        x = [0] * n
        z = [0] * n
        x[qubit] = int(letter in "XY")
        z[qubit] = int(letter in "ZY")
        return cls.from_bits(x, z, 0 if sign > 0 else 2)

    @classmethod
    def from_string(cls, s: str) -> PauliOperator:
        """Parse ``"+XZ"``, ``"-IY"``, ``"+iXX"``; the sign is required."""
        phase = {"+": 0, "-": 2}.get(s[:1])
        if phase is None:
            raise ValueError(f"Pauli string needs a leading sign: {s!r}")
        body = s[1:]
        if body.startswith("i"):
            phase += 1
            body = body[1:]
        if not body or any(c not in "IXYZ" for c in body):
            raise ValueError(f"bad Pauli string {s!r}")
        return cls.from_bits([int(c in "XY") for c in body], [int(c in "ZY") for c in body], phase)

    def x_bit(self, q: int) -> int:
        return (self.vec >> (2 * self.n - 1 - q)) & 1

    def z_bit(self, q: int) -> int:
        return (self.vec >> (self.n - 1 - q)) & 1

    def letter(self, q: int) -> str:
        return _LETTERS[2 * self.x_bit(q) + self.z_bit(q)]

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    @property
    def support(self) -> str:
        """Bit string with ``1`` at every non-identity qubit."""
        x, z = _split(self.vec, self.n)
        return format(x | z, f"0{self.n}b")

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValueError("non-Hermitian Pauli has no real sign")
        return 1 if self.phase == 0 else -1

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        if other.n != self.n:
            raise DimensionError(f"qubit counts differ: {self.n} != {other.n}")
        f = _product_phase(self.vec, other.vec, self.n)
        return PauliOperator(self.n, self.vec ^ other.vec, self.phase + other.phase + f)

    def commutes(self, other: PauliOperator) -> bool:
        return symplectic_product(self.vec, other.vec, self.n) == 0

    def __str__(self):
        head = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return head + self.letters


@dataclass(frozen=True)
class PauliPulse:
    """One of the eight pulses ``exp(sign * i * sigma_axis * pi / 2)``."""

    axis: str
    sign: int = 1

    def __post_init__(self):
        if self.axis not in "IXYZ" or len(self.axis) != 1 or self.sign not in (1, -1):
            raise ValueError(f"bad Pauli pulse {self.axis!r}, {self.sign!r}")

    @classmethod
    def from_string(cls, s: str) -> PauliPulse:
        if len(s) != 2 or s[0] not in "+-":
            raise ValueError(f"bad Pauli pulse string {s!r}")
        return cls(s[1], 1 if s[0] == "+" else -1)

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + self.axis

    def gate(self, qubit: int) -> Gate:
        return Gate("PAULI", (qubit,), axis=self.axis, sign=self.sign)


ALL_PULSES = tuple(PauliPulse(a, s) for a in "IXYZ" for s in (1, -1))


@dataclass(frozen=True)
class CliffordElement:
    """Images of ``X_1..X_n, Z_1..Z_n`` as packed rows plus signs (phase 0 or 2)."""

    n: int
    rows: tuple[int, ...]
    phases: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != 2 * self.n or len(self.phases) != 2 * self.n:
            raise DimensionError("tableau size does not match qubit count")

    @classmethod
    def identity(cls, n: int) -> CliffordElement:
        return cls(n, BinarySymplectic.identity(n).rows, (0,) * (2 * n))

    @classmethod
    def from_images(cls, images: list[PauliOperator]) -> CliffordElement:
        n = images[0].n
        if any(not p.is_hermitian for p in images):
            raise ValueError("generator images must be Hermitian")
        return cls(n, tuple(p.vec for p in images), tuple(p.phase for p in images))

    @classmethod
    def from_pauli(cls, p: PauliOperator) -> CliffordElement:
        """Conjugation by the Pauli operator ``p``."""
        ident = BinarySymplectic.identity(p.n).rows
        return cls(p.n, ident, tuple(2 * symplectic_product(p.vec, r, p.n) for r in ident))

    def image(self, i: int) -> PauliOperator:
        return PauliOperator(self.n, self.rows[i], self.phases[i])

    @property
    def images(self) -> list[PauliOperator]:
        return [self.image(i) for i in range(2 * self.n)]

    @property
    def symplectic(self) -> BinarySymplectic:
        return BinarySymplectic(self.n, self.rows)

    def is_pauli(self) -> bool:
        return self.symplectic.is_identity()

    def __matmul__(self, other: CliffordElement) -> CliffordElement:
        return compose(self, other)

    def __str__(self):
        names = [f"X{i + 1}" for i in range(self.n)] + [f"Z{i + 1}" for i in range(self.n)]
        return "\n".join(f"{g} -> {p}" for g, p in zip(names, self.images))


def conjugate_pauli(c: CliffordElement, p: PauliOperator) -> PauliOperator:
    """Exact ``C P C^dagger`` including phase."""
    if c.n != p.n:
        raise DimensionError(f"qubit counts differ: {c.n} != {p.n}")
    n = c.n
    x, z = _split(p.vec, n)
    # sigma_v = i**(#Y) * prod_q X_q**x_q Z_q**z_q
    out = PauliOperator(n, 0, p.phase + (x & z).bit_count())
    for q in range(n):
        bit = 1 << (n - 1 - q)
        if x & bit:
            out = out * c.image(q)
        if z & bit:
            out = out * c.image(n + q)
    return out


def compose(c1: CliffordElement, c2: CliffordElement) -> CliffordElement:
    """``c1 * c2``: apply ``c2`` first, then ``c1``.

    With images stored as rows, ``class_of(compose(c1, c2))`` equals
    ``class_of(c2) @ class_of(c1)``.
    """
    if c1.n != c2.n:
        raise DimensionError(f"qubit counts differ: {c1.n} != {c2.n}")
    return CliffordElement.from_images([conjugate_pauli(c1, p) for p in c2.images])


def inverse(c: CliffordElement) -> CliffordElement:
    n = c.n
    bare = CliffordElement(n, symplectic_inv(c.symplectic).rows, (0,) * (2 * n))
    # bare * c is a Pauli conjugation; undo its signs
    err = compose(bare, c)
    return compose(err, bare)


def class_of(c: CliffordElement) -> BinarySymplectic:
    """Symplectic class: the tableau bits with signs discarded."""
    return c.symplectic


# images of (X, Z) for one-qubit gates, as (letters, sign)
_ONE_QUBIT_BASE = {
    "RX": (("X", 1), ("Y", -1)),
    "RY": (("Z", -1), ("X", 1)),
    "RZ": (("Y", 1), ("Z", 1)),
}


def _local_images(n: int, q: int, x_img: tuple[str, int], z_img: tuple[str, int]) -> CliffordElement:
    c = CliffordElement.identity(n)
    rows = list(c.rows)
    phases = list(c.phases)
    for idx, (letter, sign) in ((q, x_img), (n + q, z_img)):
        p = PauliOperator.single(n, q, letter, sign)
        rows[idx], phases[idx] = p.vec, p.phase
    return CliffordElement(n, tuple(rows), tuple(phases))


@functools.lru_cache(maxsize=4096)
def gate_clifford(gate: Gate, n: int) -> CliffordElement:
    """Tableau of one elementary gate inside an ``n``-qubit register."""
    if max(gate.qubits) >= n:
        raise DimensionError(f"{gate} does not fit in {n} qubits")
    name = gate.name
    if name == "ID":
        return CliffordElement.identity(n)
    if name in _ONE_QUBIT_BASE:
        t = gate.quarter_turns % 4
        step = _local_images(n, gate.qubits[0], *_ONE_QUBIT_BASE[name])
        out = CliffordElement.identity(n)
        for _ in range(t):
            out = compose(step, out)
        return out
    if name == "PAULI":
        if gate.axis == "I":
            return CliffordElement.identity(n)
        return CliffordElement.from_pauli(PauliOperator.single(n, gate.qubits[0], gate.axis))
    a, b = gate.qubits
    ident = CliffordElement.identity(n)
    imgs = ident.images
    if name == "G":
        # X_a -> Y_a Z_b, X_b -> Z_a Y_b, Z unchanged
        imgs[a] = PauliOperator.single(n, a, "Y") * PauliOperator.single(n, b, "Z")
        imgs[b] = PauliOperator.single(n, a, "Z") * PauliOperator.single(n, b, "Y")
    elif name == "CNOT":
        imgs[a] = PauliOperator.single(n, a, "X") * PauliOperator.single(n, b, "X")
        imgs[n + b] = PauliOperator.single(n, a, "Z") * PauliOperator.single(n, b, "Z")
    else:
        raise UnsupportedGateError(name)
    return CliffordElement.from_images(imgs)


def clifford_from_circuit(circuit: GateCircuit) -> CliffordElement:
    out = CliffordElement.identity(circuit.n_qubits)
    for g in circuit:
        out = compose(gate_clifford(g, circuit.n_qubits), out)
    return out


class StabilizerState:
    """Stabilizer state given by ``n`` commuting, independent generators."""

    def __init__(self, generators: list[PauliOperator]):
        self.n = generators[0].n
        self.generators = list(generators)

    @classmethod
    def prepared(cls, n: int) -> StabilizerState:
        """Every qubit in the ``-1`` eigenstate of ``sigma_z``."""
        return cls([PauliOperator.single(n, q, "Z", -1) for q in range(n)])

    def evolve(self, c: CliffordElement) -> StabilizerState:
        return StabilizerState([conjugate_pauli(c, g) for g in self.generators])

    def evolve_circuit(self, circuit: GateCircuit) -> StabilizerState:
        return self.evolve(clifford_from_circuit(circuit))

    def decompose(self, vec: int) -> list[int] | None:
        """Generator indices whose product has bits ``vec``, or ``None``."""
        # Gaussian elimination tracking which generators were combined
        basis: list[tuple[int, int]] = []  # (vector, combination mask)
        for j, g in enumerate(self.generators):
            v, m = g.vec, 1 << j
            for bv, bm in basis:
                if v ^ bv < v:
                    v, m = v ^ bv, m ^ bm
            if v:
                basis.append((v, m))
                basis.sort(reverse=True)
        v, m = vec, 0
        for bv, bm in basis:
            if v ^ bv < v:
                v, m = v ^ bv, m ^ bm
        if v:
            return None
        return [j for j in range(len(self.generators)) if (m >> j) & 1]

    def expectation(self, p: PauliOperator) -> int:
        """``+1``/``-1`` if ``+-p`` stabilizes the state, ``0`` otherwise."""
        idx = self.decompose(p.vec)
        if idx is None:
            return 0
        acc = PauliOperator.identity(self.n)
        for j in idx:
            acc = acc * self.generators[j]
        rel = (acc.phase - p.phase) % 4
        return 1 if rel == 0 else -1

    def group_elements(self) -> list[PauliOperator]:
        """All non-identity stabilizer group elements, sorted by bit pattern."""
        out = []
        k = len(self.generators)
        for mask in range(1, 1 << k):
            acc = PauliOperator.identity(self.n)
            for j in range(k):
                if (mask >> j) & 1:
                    acc = acc * self.generators[j]
            out.append(acc)
        return sorted(out, key=lambda p: p.vec)

    def outcome_bits(self) -> str | None:
        """Deterministic measurement bits, ``0`` for down and ``1`` for up.

        Returns ``None`` if some qubit's outcome is random.
        """
        bits = []
        for q in range(self.n):
            e = self.expectation(PauliOperator.single(self.n, q, "Z"))
            if e == 0:
                return None
            bits.append("1" if e > 0 else "0")
        return "".join(bits)
