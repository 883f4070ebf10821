"""Anticommutation graphs, independent sets and fractional colorings.

Vertex subsets are Python ints used as bitsets (bit ``i`` = vertex ``i`` of the
underlying :class:`PauliSet`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .pauli import PauliSet, PauliString, parse_pauli
from .stabilizer import StabilizerGroup, complete_to_family

EXACT_LIMIT = 24
MAX_SETS = 10**6
FLOAT_TOL = 1e-9


class ColoringError(RuntimeError):
    """Raised for enumeration blow-ups and internal LP failures."""


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class AntiCommutationGraph:
    """Vertices are the members of ``A``; edges join anticommuting pairs."""

    def __init__(self, paulis: PauliSet):
        self.paulis = paulis
        xs, zs = paulis.masks
        signs = kernels.commutation_signs(xs, zs, xs, zs)
        adj = signs < 0
        np.fill_diagonal(adj, False)
        adj.setflags(write=False)
        self.adjacency = adj
        self.neighbors = tuple(sum(1 << int(j) for j in np.flatnonzero(row)) for row in adj)

    def __len__(self) -> int:
        return len(self.paulis)

    @property
    def all_mask(self) -> int:
        return (1 << len(self)) - 1

    def num_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def is_independent(self, mask: int) -> bool:
        return all(not (self.neighbors[v] & mask) for v in _bits(mask))

    def members(self, mask: int) -> list[PauliString]:
        return [self.paulis[v] for v in _bits(mask)]


def build_graph(paulis: PauliSet | Sequence[PauliString]) -> AntiCommutationGraph:
    if not isinstance(paulis, PauliSet):
        paulis = PauliSet(paulis)
    if len(paulis) > 10**4:
        raise ValueError("graph construction is limited to 10^4 vertices")
    return AntiCommutationGraph(paulis)


def maximal_independent_sets(graph: AntiCommutationGraph, limit: int = MAX_SETS) -> list[int]:
    """All maximal independent sets (pivoting Bron-Kerbosch on the complement)."""
    full = graph.all_mask
    comp = [full & ~graph.neighbors[v] & ~(1 << v) for v in range(len(graph))]
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            out.append(r)
            if len(out) > limit:
                raise ColoringError(f"more than {limit} maximal independent sets")
            return
        pivot = max(_bits(p | x), key=lambda u: (comp[u] & p).bit_count())
        for v in list(_bits(p & ~comp[pivot])):
            bit = 1 << v
            expand(r | bit, p & comp[v], x & comp[v])
            p &= ~bit
            x |= bit

    if len(graph):
        expand(0, full, 0)
    return sorted(out, key=lambda m: sorted(_bits(m)))


def max_weight_independent_set(graph: AntiCommutationGraph, weights: Sequence) -> tuple[object, int]:
    """Exact maximum-weight independent set by branch and bound."""
    positive = [v for v in range(len(graph)) if weights[v] > 0]
    positive.sort(key=lambda v: (-weights[v], v))
    rank = {v: i for i, v in enumerate(positive)}
    best = [weights[0] * 0 if len(weights) else 0, 0]

    def search(cand: list[int], value, chosen: int) -> None:
        if value > best[0]:
            best[0], best[1] = value, chosen
        if not cand:
            return
        bound = value + sum(weights[v] for v in cand)
        if bound <= best[0]:
            return
        v, rest = cand[0], cand[1:]
        nb = graph.neighbors[v]
        search([u for u in rest if not (nb >> u) & 1], value + weights[v], chosen | (1 << v))
        search(rest, value, chosen)

    search(sorted(positive, key=rank.get), best[0], 0)
    return best[0], best[1]


def independent_sets(graph: AntiCommutationGraph, mode: str = "all-maximal",
                     weights: Sequence | None = None) -> list[int]:
    """``all-maximal`` enumerates every maximal set; ``pool`` returns the column
    pool grown by pricing during a fractional-coloring solve."""
    if mode == "all-maximal":
        return maximal_independent_sets(graph)
    if mode == "pool":
        return list(fractional_coloring(graph, method="colgen").sets)
    raise ValueError(f"unknown mode {mode!r}")


# -- LP ------------------------------------------------------------------------

@dataclass
class LpSolution:
    """Optimal basis of ``min 1.x  s.t.  M x >= 1, x >= 0`` over independent-set columns."""

    columns: list[int]
    primal: list
    dual: list
    value: object
    pivots: int
    exact: bool


class _Simplex:
    """Revised simplex with Bland's rule.

    Columns ``0..V-1`` are surplus variables (``-e_v``); the rest are
    independent sets.  The initial basis is the singleton columns, which is
    primal feasible with ``x = 1``.
    """

    def __init__(self, graph: AntiCommutationGraph, columns: list[int], exact: bool):
        self.graph = graph
        self.V = len(graph)
        self.exact = exact
        self.one = Fraction(1) if exact else 1.0
        self.zero = Fraction(0) if exact else 0.0
        self.tol = 0 if exact else FLOAT_TOL
        singletons = [1 << v for v in range(self.V)]
        self.sets = list(singletons)
        seen = set(singletons)
        for c in columns:
            if c not in seen:
                seen.add(c)
                self.sets.append(c)
        self.index = {c: i for i, c in enumerate(self.sets)}
        dtype = object if exact else float
        self.basis = [self.V + v for v in range(self.V)]  # variable ids
        self.binv = np.array([[self.one if i == j else self.zero for j in range(self.V)]
                              for i in range(self.V)], dtype=dtype)
        self.xb = np.array([self.one] * self.V, dtype=dtype)
        self.pivots = 0

    def add_column(self, mask: int) -> int:
        if mask not in self.index:
            self.index[mask] = len(self.sets)
            self.sets.append(mask)
        return self.V + self.index[mask]

    def _column(self, var: int) -> np.ndarray:
        col = np.array([self.zero] * self.V, dtype=self.binv.dtype)
        if var < self.V:
            col[var] = -self.one
        else:
            for v in _bits(self.sets[var - self.V]):
                col[v] = self.one
        return col

    def _cost(self, var: int):
        return self.zero if var < self.V else self.one

    def duals(self) -> np.ndarray:
        cb = np.array([self._cost(b) for b in self.basis], dtype=self.binv.dtype)
        return cb @ self.binv

    def reduced_cost(self, var: int, y: np.ndarray):
        if var < self.V:
            return y[var]
        return self.one - sum(y[v] for v in _bits(self.sets[var - self.V]))

    def pivot(self, var: int) -> None:
        d = self.binv @ self._column(var)
        best = None
        for i in range(self.V):
            if d[i] > self.tol:
                ratio = self.xb[i] / d[i]
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise ColoringError("LP unbounded (internal error)")
        r = best[1]
        theta = self.xb[r] / d[r]
        self.xb = self.xb - theta * d
        self.xb[r] = theta
        row = self.binv[r] / d[r]
        self.binv = self.binv - np.outer(d, row)
        self.binv[r] = row
        self.basis[r] = var
        self.pivots += 1
        if not self.exact and self.pivots % 50 == 0:
            self._refactor()

    def _refactor(self) -> None:
        bmat = np.stack([self._column(b) for b in self.basis], axis=1).astype(float)
        self.binv = np.linalg.inv(bmat)
        self.xb = self.binv @ np.ones(self.V)

    def optimize_pool(self) -> None:
        """Bland's rule over the current column pool."""
        while True:
            y = self.duals()
            entering = None
            for var in range(self.V + len(self.sets)):
                if var in self.basis:
                    continue
                if self.reduced_cost(var, y) < -self.tol:
                    entering = var
                    break
            if entering is None:
                return
            self.pivot(entering)

    def solution(self) -> LpSolution:
        x = {}
        for b, val in zip(self.basis, self.xb):
            if b >= self.V and val > self.tol:
                x[self.sets[b - self.V]] = val
        cols = sorted(x, key=lambda m: sorted(_bits(m)))
        primal = [x[c] for c in cols]
        y = list(self.duals())
        value = sum(primal, self.zero)
        return LpSolution(cols, primal, y, value, self.pivots, self.exact)


@dataclass
class FractionalColoring:
    """Weighted independent sets covering every vertex, with a dual certificate."""

    graph: AntiCommutationGraph
    sets: list[int]
    weights: list
    value: object
    dual: list = field(default_factory=list)
    dual_bound: object = None
    exact: bool = False
    pivots: int = 0

    @property
    def gap(self) -> float:
        if self.dual_bound is None:
            return float("nan")
        return float(self.value - self.dual_bound)

    def coverage(self) -> list:
        cov = [0 * self.value] * len(self.graph)
        for mask, w in zip(self.sets, self.weights):
            for v in _bits(mask):
                cov[v] += w
        return cov

    def dual_distribution(self) -> list[float]:
        total = sum(self.dual)
        return [float(y / total) for y in self.dual] if total else []

    def check(self, tol: float = FLOAT_TOL) -> None:
        for mask in self.sets:
            if not self.graph.is_independent(mask):
                raise ColoringError("coloring contains an anticommuting pair")
        if any(w < 0 for w in self.weights):
            raise ColoringError("negative weight")
        if any(c < 1 - tol for c in self.coverage()):
            raise ColoringError("some vertex is not covered")

    def to_json(self) -> dict:
        paulis = self.graph.paulis
        return {
            "zeta_f": float(self.value),
            "zeta_f_exact": str(self.value) if self.exact else None,
            "sets": [[str(paulis[v]) for v in _bits(m)] for m in self.sets],
            "weights": [float(w) for w in self.weights],
            "dual_pi": {str(p): pi for p, pi in zip(paulis, self.dual_distribution())},
            "duality_gap": self.gap,
        }


def fractional_coloring(graph: AntiCommutationGraph, method: str | None = None,
                        exact: bool | None = None) -> FractionalColoring:
    """Optimal fractional coloring.

    ``method="enumerate"`` prices over every maximal independent set;
    ``method="colgen"`` grows a pool with a maximum-weight independent set
    oracle.  Arithmetic is exact (``Fraction``) when ``|A| <= 24`` by default.
    Either way the result carries a dual certificate: ``dual_bound`` is the
    dual objective, valid because the pricing oracle shows no set has dual
    weight above one.
    """
    V = len(graph)
    if exact is None:
        exact = V <= EXACT_LIMIT
    if method is None:
        method = "enumerate" if V <= EXACT_LIMIT else "colgen"
    if V == 0:
        return FractionalColoring(graph, [], [], Fraction(0) if exact else 0.0, [], 0, exact)
    initial = maximal_independent_sets(graph) if method == "enumerate" else []
    lp = _Simplex(graph, initial, exact)
    while True:
        lp.optimize_pool()
        y = lp.duals()
        best, mask = max_weight_independent_set(graph, list(y))
        if best <= lp.one + lp.tol or mask in lp.index:
            break
        lp.add_column(mask)
    sol = lp.solution()
    # the pricing bound: any set has y-weight <= best, so y / max(best, 1) is dual feasible
    scale = best if best > lp.one else lp.one
    dual_bound = sum((y if y > 0 else lp.zero for y in sol.dual), lp.zero) / scale
    result = FractionalColoring(graph, sol.columns, sol.primal, sol.value, sol.dual,
                                dual_bound, exact, sol.pivots)
    result.check()
    return result


def xyz_coloring(n: int) -> FractionalColoring:
    """Explicit coloring of ``{X, Y, Z}^n`` by parity classes, total weight ``2 (3/2)^n``."""
    if not 1 <= n <= 10:
        raise ValueError("xyz_coloring supports 1 <= n <= 10")
    paulis = PauliSet.from_labels("".join(t) for t in itertools.product("XYZ", repeat=n))
    graph = build_graph(paulis)
    pairs = (("X", "Y"), ("Y", "Z"), ("Z", "X"))
    weight = Fraction(1, 2**n)
    sets, weights = [], []
    for choice in itertools.product(pairs, repeat=n):
        parity_sets = [0, 0]
        for picks in itertools.product((0, 1), repeat=n):
            label = "".join(choice[q][b] for q, b in enumerate(picks))
            v = paulis.position(parse_pauli(label))
            parity_sets[sum(picks) & 1] |= 1 << v
        for mask in parity_sets:
            sets.append(mask)
            weights.append(weight)
    value = sum(weights, Fraction(0))
    result = FractionalColoring(graph, sets, weights, value, exact=True)
    result.check()
    return result


# -- schedules ----------------------------------------------------------------

@dataclass
class PlanEntry:
    family: StabilizerGroup
    frequency: float
    members: list[PauliString]


@dataclass
class MeasurementPlan:
    """Families to measure and how often; every vertex appears in some family."""

    paulis: PauliSet
    entries: list[PlanEntry]
    total_weight: float = 1.0

    def frequencies(self) -> np.ndarray:
        return np.array([e.frequency for e in self.entries])

    def to_json(self) -> list[dict]:
        return [{"family": e.family.labels(), "frequency": e.frequency,
                 "members": [str(p) for p in e.members]} for e in self.entries]


def schedule(coloring: FractionalColoring) -> MeasurementPlan:
    """One family per weighted set (via :func:`complete_to_family`), frequency proportional to weight."""
    graph = coloring.graph
    covered = 0
    entries = []
    total = float(sum(coloring.weights))
    for mask, w in zip(coloring.sets, coloring.weights):
        if w <= 0:
            continue
        members = graph.members(mask)
        family = complete_to_family(members, n=graph.paulis.n)
        entries.append(PlanEntry(family, float(w) / total, members))
        covered |= mask
    if covered != graph.all_mask:
        missing = [str(graph.paulis[v]) for v in _bits(graph.all_mask & ~covered)]
        raise ColoringError(f"vertices not covered by the schedule: {missing}")
    return MeasurementPlan(graph.paulis, entries, total)
