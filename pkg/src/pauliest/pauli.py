"""Pauli strings in the symplectic (x, z) bit representation.

Conventions
-----------
* A string on ``n`` qubits stores two integer masks ``x`` and ``z``.  Qubit ``q``
  (0-based, leftmost character of the text form) sits at bit ``n - 1 - q`` so the
  masks line up with computational-basis integers where qubit 0 is the most
  significant bit.
* The operator is ``P = (x) i^{x_q z_q} X^{x_q} Z^{z_q}``, which is Hermitian
  (``Y = iXZ``).
* The *index* of a string interleaves the bits as
  ``(x_1, z_1, ..., x_n, z_n)`` read big-endian, so index 0 is the identity and
  the single-qubit order is ``I, Z, X, Y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .config import check_cap

_LETTERS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_FROM_BITS = {v: k for k, v in _LETTERS.items()}
_PHASES = (1, 1j, -1, -1j)


class PauliError(ValueError):
    """Invalid Pauli text, size mismatch, or bad subset."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 0:
            raise PauliError("qubit count must be non-negative")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise PauliError(f"bit masks do not fit in {self.n} qubits")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_index(cls, n: int, a: int) -> "PauliString":
        if not 0 <= a < 4**n:
            raise PauliError(f"index {a} out of range for n={n}")
        return cls(n, _compress(a >> 1, n), _compress(a, n))

    @property
    def index(self) -> int:
        return (_spread(self.x) << 1) | _spread(self.z)

    @property
    def num_y(self) -> int:
        return _popcount(self.x & self.z)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letter(self, q: int) -> str:
        bit = self.n - 1 - q
        return _FROM_BITS[((self.x >> bit) & 1, (self.z >> bit) & 1)]

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        return f"PauliString({format_pauli(self)!r})" if self.n else "PauliString('')"


def parse_pauli(text: str) -> PauliString:
    """Parse an uppercase string over ``{I, X, Y, Z}``."""
    text = text.strip()
    if not text:
        raise PauliError("empty Pauli string")
    x = z = 0
    for ch in text:
        try:
            bx, bz = _LETTERS[ch]
        except KeyError:
            raise PauliError(f"invalid Pauli character {ch!r} in {text!r}") from None
        x = (x << 1) | bx
        z = (z << 1) | bz
    return PauliString(len(text), x, z)


def format_pauli(p: PauliString) -> str:
    return "".join(p.letter(q) for q in range(p.n))


def _check_same(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise PauliError(f"size mismatch: {p.n} vs {q.n} qubits")


def symplectic_inner(a: int, b: int, n: int | None = None) -> int:
    """Symplectic form of two interleaved indices, as a bit."""
    if n is not None and (a >= 4**n or b >= 4**n):
        raise PauliError(f"index out of range for n={n}")
    # swap the x/z halves of every pair in b, then take the parity of the overlap
    swapped = ((b >> 1) & _ZMASK) | ((b & _ZMASK) << 1)
    return _popcount(a & swapped) & 1


_ZMASK = int("01" * 64, 2)


def commutes(p: PauliString, q: PauliString) -> int:
    """+1 if the two strings commute, -1 if they anticommute."""
    _check_same(p, q)
    return 1 - 2 * (_popcount((p.x & q.z) ^ (p.z & q.x)) & 1)


def mul(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Product ``p q = phase * r`` with the phase tracked exactly in {1, i, -1, -i}."""
    _check_same(p, q)
    rx, rz = p.x ^ q.x, p.z ^ q.z
    e = (_popcount(p.x & p.z) + _popcount(q.x & q.z) + 2 * _popcount(p.z & q.x)
         - _popcount(rx & rz)) % 4
    return _PHASES[e], PauliString(p.n, rx, rz)


def embed(p: PauliString, blocks: Iterable[int], c: int) -> PauliString:
    """The ``cn``-qubit string acting as ``p`` on every 1-based block in ``blocks``."""
    blocks = set(blocks)
    if not blocks <= set(range(1, c + 1)):
        raise PauliError(f"blocks {sorted(blocks)} not a subset of 1..{c}")
    x = z = 0
    for j in blocks:
        shift = p.n * (c - j)
        x |= p.x << shift
        z |= p.z << shift
    return PauliString(p.n * c, x, z)


def concat(*parts: PauliString) -> PauliString:
    """Tensor product, first argument on the leading qubits."""
    x = z = n = 0
    for part in parts:
        x = (x << part.n) | part.x
        z = (z << part.n) | part.z
        n += part.n
    return PauliString(n, x, z)


# -- dense realisation -------------------------------------------------------

def _basis_phases(n: int, x: int, z: int) -> np.ndarray:
    """Coefficients ``c_r`` with ``P|r> = c_r |r ^ x>``."""
    r = np.arange(1 << n, dtype=np.uint64)
    signs = 1 - 2 * (np.bitwise_count(r & np.uint64(z)) & 1).astype(np.int64)
    return (1j ** _popcount(x & z)) * signs


def to_dense(p: PauliString) -> np.ndarray:
    check_cap(p.n, "to_dense")
    d = 1 << p.n
    out = np.zeros((d, d), dtype=np.complex128)
    r = np.arange(d)
    out[r ^ p.x, r] = _basis_phases(p.n, p.x, p.z)
    return out


def apply_left(p: PauliString, mat: np.ndarray) -> np.ndarray:
    """``P @ mat`` without building ``P``."""
    r = np.arange(1 << p.n)
    coef = _basis_phases(p.n, p.x, p.z)
    out = np.empty_like(mat, dtype=np.complex128)
    out[r ^ p.x] = coef.reshape((-1,) + (1,) * (mat.ndim - 1)) * mat[r]
    return out


def conjugate(p: PauliString, mat: np.ndarray) -> np.ndarray:
    """``P @ mat @ P``."""
    left = apply_left(p, mat)
    return apply_left(p, left.conj().T).conj().T


def trace_with(p: PauliString, mat: np.ndarray) -> complex:
    """``tr(P @ mat)``."""
    r = np.arange(1 << p.n)
    return complex(np.sum(_basis_phases(p.n, p.x, p.z) * mat[r, r ^ p.x]))


# -- index tables and Walsh transforms ---------------------------------------

def _spread(v: int) -> int:
    out, bit = 0, 0
    while v:
        if v & 1:
            out |= 1 << (2 * bit)
        v >>= 1
        bit += 1
    return out


def _compress(a: int, n: int) -> int:
    out = 0
    for bit in range(n):
        out |= ((a >> (2 * bit)) & 1) << bit
    return out


@lru_cache(maxsize=None)
def index_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(xs, zs)`` uint64 masks of every string, in index order."""
    a = np.arange(4**n, dtype=np.uint64)
    xs = np.zeros_like(a)
    zs = np.zeros_like(a)
    for bit in range(n):
        xs |= ((a >> np.uint64(2 * bit + 1)) & np.uint64(1)) << np.uint64(bit)
        zs |= ((a >> np.uint64(2 * bit)) & np.uint64(1)) << np.uint64(bit)
    xs.setflags(write=False)
    zs.setflags(write=False)
    return xs, zs


@lru_cache(maxsize=None)
def _xz_grid_to_index(n: int) -> np.ndarray:
    """``grid[x, z]`` = interleaved index."""
    xs, zs = index_tables(n)
    grid = np.empty((1 << n, 1 << n), dtype=np.int64)
    grid[xs.astype(np.int64), zs.astype(np.int64)] = np.arange(4**n)
    grid.setflags(write=False)
    return grid


@lru_cache(maxsize=None)
def y_signs(n: int) -> np.ndarray:
    """``(-1)^{#Y(P_a)}`` for every index ``a``; this is the sign of ``P_a^T``."""
    xs, zs = index_tables(n)
    out = (1 - 2 * (np.bitwise_count(xs & zs) & 1)).astype(np.int8)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _swap_xz_perm(n: int) -> np.ndarray:
    a = np.arange(4**n, dtype=np.int64)
    zmask = int("01" * n, 2) if n else 0
    perm = ((a >> 1) & zmask) | ((a & zmask) << 1)
    perm.setflags(write=False)
    return perm


def symplectic_walsh(values: np.ndarray, n: int) -> np.ndarray:
    """``out[..., b] = sum_a values[..., a] (-1)^{<a, b>}`` over interleaved indices."""
    values = np.asarray(values)
    return kernels.fwht(values[..., _swap_xz_perm(n)])


def pauli_expectations(mat: np.ndarray) -> np.ndarray:
    """``tr(P_a @ mat)`` for every index ``a`` (complex, length ``4^n``)."""
    d = mat.shape[0]
    n = d.bit_length() - 1
    r = np.arange(d)
    # rows[x, r] = mat[r, r ^ x]; transform over r gives sum_r (-1)^{z.r} mat[r, r^x]
    rows = mat[r[None, :], r[None, :] ^ r[:, None]]
    grid = kernels.fwht(rows)
    xs_, zs_ = np.meshgrid(r, r, indexing="ij")
    grid = grid * (1j ** (np.bitwise_count((xs_ & zs_).astype(np.uint64)) % 4))
    out = np.empty(d * d, dtype=np.complex128)
    out[_xz_grid_to_index(n)] = grid
    return out


def from_pauli_coefficients(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Dense ``sum_a coeffs[a] P_a`` from a length ``4^n`` coefficient vector."""
    check_cap(n, "from_pauli_coefficients")
    d = 1 << n
    r = np.arange(d)
    grid = np.asarray(coeffs, dtype=np.complex128)[_xz_grid_to_index(n)]
    xs_, zs_ = np.meshgrid(r, r, indexing="ij")
    grid = grid * (1j ** (np.bitwise_count((xs_ & zs_).astype(np.uint64)) % 4))
    cols = kernels.fwht(grid)  # cols[x, r] = coefficient of |r ^ x><r|
    out = np.zeros((d, d), dtype=np.complex128)
    out[r[None, :] ^ r[:, None], r[None, :]] = cols
    return out


# -- sets --------------------------------------------------------------------

class PauliSet(Sequence[PauliString]):
    """Ordered collection of distinct Pauli strings on a common qubit count."""

    def __init__(self, members: Iterable[PauliString], n: int | None = None):
        members = tuple(members)
        if n is None:
            if not members:
                raise PauliError("cannot infer n for an empty set")
            n = members[0].n
        seen = set()
        for p in members:
            if p.n != n:
                raise PauliError(f"mixed qubit counts in set ({p.n} vs {n})")
            if p in seen:
                raise PauliError(f"duplicate member {p}")
            seen.add(p)
        self.n = n
        self._members = members
        self._pos = {p: i for i, p in enumerate(members)}

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "PauliSet":
        return cls(parse_pauli(s) for s in labels)

    @classmethod
    def from_text(cls, text: str) -> "PauliSet":
        labels = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                labels.append(line)
        return cls.from_labels(labels)

    @classmethod
    def from_file(cls, path: str | Path) -> "PauliSet":
        return cls.from_text(Path(path).read_text())

    @classmethod
    def all(cls, n: int) -> "PauliSet":
        return cls((PauliString.from_index(n, a) for a in range(4**n)), n=n)

    def to_text(self) -> str:
        return "".join(f"{p}\n" for p in self._members)

    def __getitem__(self, i):
        return self._members[i]

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self._members)

    def __contains__(self, p) -> bool:
        return p in self._pos

    def position(self, p: PauliString) -> int:
        return self._pos[p]

    @property
    def indices(self) -> np.ndarray:
        return np.array([p.index for p in self._members], dtype=np.int64)

    @property
    def masks(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([p.x for p in self._members], dtype=np.uint64)
        zs = np.array([p.z for p in self._members], dtype=np.uint64)
        return xs, zs

    def labels(self) -> list[str]:
        return [str(p) for p in self._members]

    def __repr__(self) -> str:
        return f"PauliSet(n={self.n}, size={len(self)})"
