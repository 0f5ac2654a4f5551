"""Binary symplectic matrices over GF(2).

A ``2n x 2n`` bit matrix ``M`` with ``M S M^T = S (mod 2)``, where ``S`` has
zero diagonal blocks and identity off-diagonal blocks, labels a Clifford
unitary modulo Pauli products.  Columns are ordered ``(x_1..x_n, z_1..z_n)``
and row ``i`` is the image of the ``i``-th generator ``X_1..X_n, Z_1..Z_n``.

Rows are stored packed into Python integers, first column in the most
significant bit, so a row reads the same as its bit string.
"""
from __future__ import annotations

import functools
from collections.abc import Sequence
from dataclasses import dataclass
from math import prod

import numpy as np

__all__ = [
    "BinarySymplectic",
    "SymplecticList",
    "enumerate_symplectic",
    "group_order",
    "is_symplectic",
    "random_symplectic",
    "symplectic_form",
    "symplectic_from_index",
    "symplectic_inv",
    "symplectic_mul",
]

MAX_ENUMERATION_QUBITS = 3


class DimensionError(ValueError):
    """Raised for odd-sized or mismatched matrices."""


class CapacityError(ValueError):
    """Raised when an exhaustive operation is requested beyond its guard."""


def symplectic_product(a: int, b: int, n: int) -> int:
    """Symplectic inner product of two packed ``2n``-bit vectors."""
    mask = (1 << n) - 1
    return (((a >> n) & b & mask) ^ ((b >> n) & a & mask)).bit_count() & 1


def vec_mat(v: int, rows: Sequence[int]) -> int:
    """Row vector times matrix over GF(2), both packed."""
    nn = len(rows)
    out = 0
    for j in range(nn):
        if (v >> (nn - 1 - j)) & 1:
            out ^= rows[j]
    return out


@dataclass(frozen=True)
class BinarySymplectic:
    """A packed ``2n x 2n`` bit matrix; see the module docstring for layout."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"qubit count must be positive, got {self.n}")
        if len(self.rows) != 2 * self.n:
            raise DimensionError(f"expected {2 * self.n} rows, got {len(self.rows)}")
        limit = 1 << (2 * self.n)
        if any(r < 0 or r >= limit for r in self.rows):
            raise DimensionError("row value out of range for 2n columns")

    @classmethod
    def identity(cls, n: int) -> BinarySymplectic:
        nn = 2 * n
        return cls(n, tuple(1 << (nn - 1 - i) for i in range(nn)))

    @classmethod
    def from_bits(cls, bits, check: bool = True) -> BinarySymplectic:
        arr = np.asarray(bits, dtype=np.uint8) & 1
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] % 2:
            raise DimensionError(f"dimension {arr.shape[0]} is odd")
        rows = tuple(int("".join(map(str, r)), 2) for r in arr.tolist())
        m = cls(arr.shape[0] // 2, rows)
        if check and not is_symplectic(m):
            raise ValueError("matrix is not symplectic")
        return m

    @classmethod
    def from_strings(cls, rows: Sequence[str], check: bool = True) -> BinarySymplectic:
        return cls.from_bits([[int(c) for c in r] for r in rows], check=check)

    def to_bits(self) -> np.ndarray:
        nn = 2 * self.n
        return np.array([[(r >> (nn - 1 - j)) & 1 for j in range(nn)] for r in self.rows],
                        dtype=np.uint8)

    def to_strings(self) -> list[str]:
        return [format(r, f"0{2 * self.n}b") for r in self.rows]

    @property
    def key(self) -> int:
        """Concatenated rows; orders matrices row-major lexicographically."""
        k = 0
        for r in self.rows:
            k = (k << (2 * self.n)) | r
        return k

    def is_identity(self) -> bool:
        return self == BinarySymplectic.identity(self.n)

    def __matmul__(self, other: BinarySymplectic) -> BinarySymplectic:
        return symplectic_mul(self, other)

    def inverse(self) -> BinarySymplectic:
        return symplectic_inv(self)

    def __str__(self):
        return "\n".join(self.to_strings())


def symplectic_form(n: int) -> np.ndarray:
    s = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    s[:n, n:] = np.eye(n, dtype=np.uint8)
    s[n:, :n] = np.eye(n, dtype=np.uint8)
    return s


def is_symplectic(m) -> bool:
    """True iff ``M S M^T = S`` over GF(2)."""
    if isinstance(m, BinarySymplectic):
        n, rows = m.n, m.rows
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                want = 1 if j - i == n else 0
                if symplectic_product(rows[i], rows[j], n) != want:
                    return False
        return True
    arr = np.asarray(m, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] % 2:
        raise DimensionError(f"dimension {arr.shape[0]} is odd")
    s = symplectic_form(arr.shape[0] // 2).astype(np.int64)
    return bool(np.array_equal((arr @ s @ arr.T) % 2, s))


def _check_pair(a: BinarySymplectic, b: BinarySymplectic):
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} != {b.n}")


def symplectic_mul(a: BinarySymplectic, b: BinarySymplectic) -> BinarySymplectic:
    """GF(2) matrix product ``a @ b``."""
    _check_pair(a, b)
    return BinarySymplectic(a.n, tuple(vec_mat(r, b.rows) for r in a.rows))


def symplectic_inv(a: BinarySymplectic) -> BinarySymplectic:
    """Inverse via ``S A^T S``; valid because ``A`` preserves ``S``."""
    n = a.n
    t = a.to_bits().T
    # S X S swaps the x and z blocks of both rows and columns
    inv = np.block([[t[n:, n:], t[n:, :n]], [t[:n, n:], t[:n, :n]]])
    return BinarySymplectic.from_bits(inv, check=False)


def group_order(n: int) -> int:
    """``|Sp(2n, 2)| = 2^(n^2) * prod_j (4^j - 1)``."""
    return 2 ** (n * n) * prod(4**j - 1 for j in range(1, n + 1))


class SymplecticList(Sequence):
    """All symplectic matrices for ``n`` qubits in row-major lexicographic order.

    Backed by an ``(N, 2n)`` array of packed rows; items are materialized
    lazily as :class:`BinarySymplectic`.
    """

    def __init__(self, n: int, rows: np.ndarray):
        self.n = n
        self.rows = rows
        self.rows.flags.writeable = False
        shifts = (2 * n * np.arange(2 * n - 1, -1, -1)).astype(np.uint64)
        self.keys = np.bitwise_or.reduce(rows.astype(np.uint64) << shifts, axis=1)
        self.keys.flags.writeable = False

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return BinarySymplectic(self.n, tuple(int(r) for r in self.rows[i]))

    def index(self, m: BinarySymplectic) -> int:
        if m.n != self.n:
            raise DimensionError(f"qubit counts differ: {m.n} != {self.n}")
        k = np.uint64(m.key)
        pos = int(np.searchsorted(self.keys, k))
        if pos == len(self.keys) or self.keys[pos] != k:
            raise ValueError("matrix is not symplectic")
        return pos

    def indices_of_rows(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`index` for an ``(K, 2n)`` packed-row array."""
        n = self.n
        shifts = (2 * n * np.arange(2 * n - 1, -1, -1)).astype(np.uint64)
        keys = np.bitwise_or.reduce(rows.astype(np.uint64) << shifts, axis=1)
        return np.searchsorted(self.keys, keys)


def _pairing_table(n: int) -> np.ndarray:
    v = np.arange(1 << (2 * n), dtype=np.int64)
    mask = (1 << n) - 1
    a, b = v[:, None], v[None, :]
    w = (((a >> n) & b & mask) ^ ((b >> n) & a & mask)).astype(np.uint64)
    return (np.bitwise_count(w) & 1).astype(np.uint8)


@functools.lru_cache(maxsize=None)
def enumerate_symplectic(n: int) -> SymplecticList:
    """Every symplectic matrix for ``n <= 3`` qubits, canonically ordered.

    Rows are filled one at a time; a candidate row must have the required
    symplectic product with every earlier row.  Candidates are scanned in
    increasing order and prefixes are kept sorted, so the output is in
    row-major lexicographic order.
    """
    if n < 1:
        raise DimensionError(f"qubit count must be positive, got {n}")
    if n > MAX_ENUMERATION_QUBITS:
        raise CapacityError(f"enumeration is limited to n <= {MAX_ENUMERATION_QUBITS}")
    nn = 2 * n
    pair = _pairing_table(n)
    prefixes = np.zeros((1, 0), dtype=np.uint8)
    for i in range(nn):
        ok = np.ones((len(prefixes), 1 << nn), dtype=bool)
        ok[:, 0] = False
        for j in range(i):
            want = 1 if i - j == n else 0
            ok &= pair[prefixes[:, j]] == want
        pi, ci = np.nonzero(ok)
        prefixes = np.column_stack([prefixes[pi], ci.astype(np.uint8)])
    return SymplecticList(n, prefixes)


def _complete_basis(n: int, u: int, v: int) -> list[int]:
    """Rows of a symplectic matrix whose rows ``0`` and ``n`` are ``u, v``.

    Symplectic Gram-Schmidt over the standard basis; requires ``<u, v> = 1``.
    """
    nn = 2 * n

    def project(x, a, b):
        return x ^ (a if symplectic_product(x, b, n) else 0) ^ (b if symplectic_product(x, a, n) else 0)

    pairs = [(u, v)]
    pool = [project(1 << (nn - 1 - k), u, v) for k in range(nn)]
    pool = [x for x in pool if x]
    while pool:
        a = pool[0]
        b = next(x for x in pool[1:] if symplectic_product(a, x, n))
        pairs.append((a, b))
        pool = [y for y in (project(x, a, b) for x in pool) if y]
    rows = [0] * nn
    for k, (a, b) in enumerate(pairs):
        rows[k], rows[k + n] = a, b
    return rows


def _assemble(n: int, u: int, v: int, sub: BinarySymplectic | None) -> BinarySymplectic:
    basis = _complete_basis(n, u, v)
    if sub is None:
        return BinarySymplectic(n, tuple(basis))
    m = n - 1
    # embed the (n-1)-qubit matrix on qubits 1..n-1 and combine the basis rows
    slots = [k for k in range(2 * n) if k not in (0, n)]
    rows = [basis[0]] + [0] * (2 * n - 1)
    rows[n] = basis[n]
    for i_sub, r in enumerate(sub.rows):
        acc = 0
        for j_sub in range(2 * m):
            if (r >> (2 * m - 1 - j_sub)) & 1:
                acc ^= basis[slots[j_sub]]
        rows[slots[i_sub]] = acc
    return BinarySymplectic(n, tuple(rows))


def symplectic_from_index(index: int, n: int) -> BinarySymplectic:
    """Bijection from ``range(group_order(n))`` onto the symplectic group.

    The index is read as mixed-radix digits choosing row ``0`` (any nonzero
    vector), row ``n`` (the k-th vector pairing to 1 with row ``0``) and then,
    recursively, a matrix on the remaining ``n - 1`` qubits.  Not the
    canonical enumeration order.
    """
    if not 0 <= index < group_order(n):
        raise ValueError(f"index {index} out of range for n={n}")
    nn = 2 * n
    u = index % ((1 << nn) - 1) + 1
    index //= (1 << nn) - 1
    k = index % (1 << (nn - 1))
    index //= 1 << (nn - 1)
    v = [x for x in range(1 << nn) if symplectic_product(u, x, n)][k]
    sub = symplectic_from_index(index, n - 1) if n > 1 else None
    return _assemble(n, u, v, sub)


def _random_vector(rng: np.random.Generator, nbits: int) -> int:
    raw = int.from_bytes(rng.bytes((nbits + 7) // 8), "big")
    return raw & ((1 << nbits) - 1)


def _random_constructive(n: int, rng: np.random.Generator) -> BinarySymplectic:
    nn = 2 * n
    u = 0
    while u == 0:
        u = _random_vector(rng, nn)
    while True:
        v = _random_vector(rng, nn)
        if symplectic_product(u, v, n):
            break
    sub = _random_constructive(n - 1, rng) if n > 1 else None
    return _assemble(n, u, v, sub)


def random_symplectic(n: int, rng: np.random.Generator) -> BinarySymplectic:
    """Uniformly random symplectic matrix.

    ``n <= 2`` draws a uniform index into :func:`enumerate_symplectic`;
    larger ``n`` uses the constructive sampler, which picks the first
    conjugate pair uniformly and recurses on its symplectic complement.
    """
    if n < 1:
        raise DimensionError(f"qubit count must be positive, got {n}")
    if n <= 2:
        table = enumerate_symplectic(n)
        return table[int(rng.integers(len(table)))]
    return _random_constructive(n, rng)
