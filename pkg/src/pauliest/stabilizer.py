"""Stabilizer groups, their eigenbases, and stabilizer coverings.

Group elements are interleaved Pauli indices (see :mod:`pauliest.pauli`).
Generators carry phase +1; products of generators may pick up a sign, which
is tracked in ``StabilizerGroup.signs`` so that every projector and readout
formula stays exact.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from . import pauli as pl
from .config import check_cap
from .pauli import PauliSet, PauliString
from .quantum import Povm, PureState

# Irreducible polynomials over GF(2), bit i = coefficient of t^i.
IRREDUCIBLE = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
}
MAX_COVERING_M = max(IRREDUCIBLE)


class StabilizerError(ValueError):
    """Dependent or anticommuting generators, or a non-maximal group where one is required."""


def _swap(a: int) -> int:
    return ((a >> 1) & pl._ZMASK) | ((a & pl._ZMASK) << 1)


def _inner(a: int, b: int) -> int:
    return pl._popcount(a & _swap(b)) & 1


class _Gf2Span:
    """Incremental row-echelon basis over GF(2), keyed by leading bit."""

    def __init__(self):
        self.rows: dict[int, int] = {}

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            row = self.rows.get(top)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if v == 0:
            return False
        self.rows[v.bit_length() - 1] = v
        return True


def _to_index(g, m: int | None) -> tuple[int, int]:
    if isinstance(g, PauliString):
        return g.index, g.n
    if isinstance(g, str):
        p = pl.parse_pauli(g)
        return p.index, p.n
    if m is None:
        raise StabilizerError("integer generators need an explicit qubit count")
    return int(g), m


class StabilizerGroup:
    """Abelian group generated by independent, pairwise commuting Pauli strings."""

    def __init__(self, m: int, generators: Sequence[int]):
        self.m = m
        self.generators = tuple(int(g) for g in generators)
        span = _Gf2Span()
        for i, g in enumerate(self.generators):
            if not 0 < g < 4**m:
                raise StabilizerError(f"generator index {g} invalid for m={m}")
            if not span.add(g):
                raise StabilizerError(f"generator {self._label(g)} is dependent on the others")
            for h in self.generators[:i]:
                if _inner(g, h):
                    raise StabilizerError(f"generators {self._label(h)} and {self._label(g)} anticommute")
        self._lock = threading.Lock()
        self._basis: StabilizerBasis | None = None

    def _label(self, a: int) -> str:
        return str(PauliString.from_index(self.m, a))

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def is_maximal(self) -> bool:
        return self.rank == self.m

    @cached_property
    def _enumerated(self) -> tuple[np.ndarray, np.ndarray]:
        idx = [0]
        signs = [1]
        ops = [PauliString.identity(self.m)]
        for g in self.generators:
            gp = PauliString.from_index(self.m, g)
            for j in range(len(ops)):
                phase, prod = pl.mul(ops[j], gp)
                # commuting Hermitian strings multiply to +-1 times a string
                ops.append(prod)
                idx.append(prod.index)
                signs.append(int(round(phase.real)) * signs[j])
        idx_arr = np.array(idx, dtype=np.int64)
        sign_arr = np.array(signs, dtype=np.int8)
        idx_arr.setflags(write=False)
        sign_arr.setflags(write=False)
        return idx_arr, sign_arr

    @property
    def elements(self) -> np.ndarray:
        """Indices of all ``2^rank`` elements; entry ``j`` is the product of generators in bitmask ``j``."""
        return self._enumerated[0]

    @property
    def signs(self) -> np.ndarray:
        """``signs[j]``: the product of generators in ``j`` equals ``signs[j] * P_{elements[j]}``."""
        return self._enumerated[1]

    def element_set(self) -> frozenset[int]:
        return frozenset(int(a) for a in self.elements)

    def __contains__(self, p) -> bool:
        a = p.index if isinstance(p, PauliString) else int(p)
        return a in self.element_set()

    def labels(self) -> list[str]:
        return [self._label(g) for g in self.generators]

    def __eq__(self, other) -> bool:
        return isinstance(other, StabilizerGroup) and self.m == other.m and self.element_set() == other.element_set()

    def __hash__(self) -> int:
        return hash((self.m, self.element_set()))

    def __repr__(self) -> str:
        return f"StabilizerGroup(m={self.m}, generators={self.labels()})"


def make_group(generators: Iterable, m: int | None = None) -> StabilizerGroup:
    """Validated group from Pauli text, :class:`PauliString` or integer indices."""
    idx = []
    for g in generators:
        a, gm = _to_index(g, m)
        if m is None:
            m = gm
        elif gm != m:
            raise StabilizerError(f"generator on {gm} qubits in a group on {m}")
        idx.append(a)
    if m is None:
        raise StabilizerError("empty generator list needs an explicit qubit count")
    return StabilizerGroup(m, idx)


def group_from_text(text: str) -> StabilizerGroup:
    return make_group(PauliSet.from_text(text))


def enumerate_elements(group: StabilizerGroup) -> np.ndarray:
    return group.elements


def symplectic_complement(group: StabilizerGroup) -> tuple[list[int], list[int]]:
    """Basis of the symplectic complement and one representative per outcome label.

    Outcome labels are cosets of the complement in ``Z_2^{2m}`` (the eigenvalue
    pattern ``(-1)^{<e, g>}`` depends only on that coset).  Each label is the
    smallest index in its coset; labels are returned in increasing order.
    """
    m = group.m
    syndromes = _syndromes(group)
    perp = np.flatnonzero(syndromes == 0)
    span = _Gf2Span()
    basis = [int(v) for v in perp if span.add(int(v))]
    # first occurrence of each syndrome in index order is the smallest member
    _, first = np.unique(syndromes, return_index=True)
    reps = sorted(int(v) for v in first)
    assert len(basis) == 2 * m - group.rank
    return basis, reps


def _syndromes(group: StabilizerGroup) -> np.ndarray:
    """``syndrome[v]`` packs ``<v, g_i>`` for every generator into an int."""
    v = np.arange(4**group.m, dtype=np.uint64)
    out = np.zeros(len(v), dtype=np.int64)
    for i, g in enumerate(group.generators):
        bits = np.bitwise_count(v & np.uint64(_swap(g))) & 1
        out |= bits.astype(np.int64) << i
    return out


class StabilizerBasis:
    """Joint eigenspaces of a stabilizer group, one per outcome label ``e``.

    The projector for label ``e`` is ``2^{-r} sum_j signs[j] (-1)^{<e, s_j>} P_{s_j}``
    and ``P_{s_j}`` reads out ``signs[j] (-1)^{<e, s_j>}`` on it.
    """

    def __init__(self, group: StabilizerGroup):
        self.group = group
        _, reps = symplectic_complement(group)
        self.coset_reps = tuple(reps)
        self._lock = threading.Lock()
        self._projectors: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.coset_reps)

    @cached_property
    def sign_table(self) -> np.ndarray:
        """``table[i, j] = (-1)^{<e_i, s_j>}`` as int8."""
        m = self.group.m
        xs, zs = pl.index_tables(m)
        reps = np.array(self.coset_reps, dtype=np.int64)
        els = self.group.elements
        return kernels.commutation_signs(xs[reps], zs[reps], xs[els], zs[els])

    def readout(self) -> np.ndarray:
        """``readout[i, j]``: eigenvalue of ``P_{s_j}`` in eigenspace ``i``."""
        return self.sign_table * self.group.signs[None, :]

    def probabilities(self, spectrum: np.ndarray) -> np.ndarray:
        """Outcome probabilities from a Pauli spectrum ``tr(P_a rho)``."""
        lam = np.asarray(spectrum)[self.group.elements]
        p = self.readout() @ lam / (1 << self.group.rank)
        return np.clip(p, 0.0, None) / np.clip(p, 0.0, None).sum()

    @property
    def projectors(self) -> np.ndarray:
        if self._projectors is None:
            with self._lock:
                if self._projectors is None:
                    self._projectors = self._build()
        return self._projectors

    def _build(self) -> np.ndarray:
        m = self.group.m
        check_cap(m, "stabilizer eigenbasis")
        coeffs = np.zeros((len(self), 4**m))
        coeffs[:, self.group.elements] = self.readout() / (1 << self.group.rank)
        out = np.stack([pl.from_pauli_coefficients(c, m) for c in coeffs])
        out.setflags(write=False)
        return out

    def labels(self) -> list[str]:
        return [str(PauliString.from_index(self.group.m, e)) for e in self.coset_reps]


def eigenbasis(group: StabilizerGroup) -> StabilizerBasis:
    """Memoized eigenbasis of ``group``."""
    if group._basis is None:
        with group._lock:
            if group._basis is None:
                group._basis = StabilizerBasis(group)
    return group._basis


def clifford_povm(family: StabilizerGroup) -> Povm:
    """Rank-1 projective measurement onto the joint eigenbasis of a maximal group."""
    if not family.is_maximal:
        raise StabilizerError(f"group of rank {family.rank} on {family.m} qubits is not maximal")
    basis = eigenbasis(family)
    return Povm(basis.projectors, labels=basis.coset_reps)


def eigenstate(group: StabilizerGroup, outcome: int = 0) -> PureState:
    """The joint eigenvector of a maximal group for outcome position ``outcome``.

    The global phase is fixed so the first nonzero amplitude is real positive.
    """
    if not group.is_maximal:
        raise StabilizerError("eigenstates are rank 1 only for maximal groups")
    proj = eigenbasis(group).projectors[outcome]
    w, v = np.linalg.eigh(proj)
    vec = v[:, np.argmax(w)]
    lead = vec[np.flatnonzero(np.abs(vec) > 1e-12)[0]]
    return PureState(vec * (abs(lead) / lead))


def complete_to_family(members, n: int | None = None) -> StabilizerGroup:
    """Extend commuting strings to a maximal group, scanning indices in order."""
    if isinstance(members, StabilizerGroup):
        if members.is_maximal:
            return members
        n = members.m
        seeds = list(members.generators)
    else:
        members = list(members)
        if n is None:
            if not members:
                raise StabilizerError("need n for an empty set")
            n = members[0].n
        seeds = [p.index for p in members]
        for i, a in enumerate(seeds):
            for b in seeds[:i]:
                if _inner(a, b):
                    raise StabilizerError(
                        f"{PauliString.from_index(n, b)} and {PauliString.from_index(n, a)} anticommute")
    span = _Gf2Span()
    gens = [a for a in seeds if span.add(a)]
    a = 1
    while len(gens) < n:
        if all(not _inner(a, g) for g in gens) and span.add(a):
            gens.append(a)
        a += 1
    return StabilizerGroup(n, gens)


# -- GF(2^m) spread covering ---------------------------------------------------

def _gf_mul(a: int, b: int, m: int) -> int:
    poly = IRREDUCIBLE[m]
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return out


def _gf_trace(a: int, m: int) -> int:
    t, acc = a, a
    for _ in range(m - 1):
        t = _gf_mul(t, t, m)
        acc ^= t
    assert acc in (0, 1)
    return acc


@dataclass(frozen=True)
class StabilizerCovering:
    m: int
    groups: tuple[StabilizerGroup, ...]

    def __len__(self) -> int:
        return len(self.groups)

    def to_json(self) -> dict:
        return {"m": self.m, "groups": [g.labels() for g in self.groups]}

    @classmethod
    def from_json(cls, data: dict) -> "StabilizerCovering":
        m = int(data["m"])
        return cls(m, tuple(make_group(gens, m=m) for gens in data["groups"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@lru_cache(maxsize=None)
def stabilizer_covering(m: int) -> StabilizerCovering:
    """``2^m + 1`` maximal groups partitioning the non-identity strings on ``m`` qubits.

    Uses the symplectic spread of GF(2^m): for each field element ``alpha`` the
    group ``{(u, z) : z_i = Tr(alpha u t^i)}`` (``u`` in polynomial coordinates),
    plus the all-Z group.  The trace form is symmetric, so every group is
    isotropic, and distinct slopes intersect only in the identity.
    """
    if m == 0:
        return StabilizerCovering(0, (StabilizerGroup(0, ()),))
    if not 1 <= m <= MAX_COVERING_M:
        raise StabilizerError(f"covering supports 0 <= m <= {MAX_COVERING_M}, got {m}")
    powers = [1 << i for i in range(m)]
    groups = []
    for alpha in range(1 << m):
        gens = []
        for u in powers:
            au = _gf_mul(alpha, u, m)
            z = 0
            for i, ti in enumerate(powers):
                z |= _gf_trace(_gf_mul(au, ti, m), m) << i
            gens.append(PauliString(m, u, z).index)
        groups.append(StabilizerGroup(m, gens))
    groups.append(StabilizerGroup(m, [PauliString(m, 0, u).index for u in powers]))
    return StabilizerCovering(m, tuple(groups))
