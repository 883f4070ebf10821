"""Sample-complexity quantities, lower-bound formulas and lemma verifiers."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from . import pauli as pl
from .config import check_cap
from .pauli import PauliSet, PauliString
from .protocols import StateEnsemble, _subsets
from .quantum import (Povm, PureState, chi2_divergence, haar_random_pure, maximally_mixed,
                      pauli_spectrum, rho_p)
from .stabilizer import clifford_povm, stabilizer_covering


class VerificationError(AssertionError):
    """A randomized lemma check found a violation; ``counterexample`` holds the data."""

    def __init__(self, message: str, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


def _weights(paulis: PauliSet, pi) -> np.ndarray:
    if isinstance(pi, Mapping):
        w = np.array([float(pi.get(str(p), pi.get(p, 0.0))) for p in paulis])
    else:
        w = np.asarray(pi, dtype=float)
    if len(w) != len(paulis) or np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
        raise ValueError("pi must be a distribution over the set")
    return w


# -- the memory-free game --------------------------------------------------------

def delta_game_value(paulis: PauliSet, pi, psi: PureState) -> float:
    """``sum_P pi_P <psi|P|psi>^2``."""
    w = _weights(paulis, pi)
    lam = pauli_spectrum(psi)[paulis.indices]
    return float(w @ lam**2)


def _game_matrix(paulis: PauliSet, w: np.ndarray, expect: np.ndarray) -> np.ndarray:
    """``H = sum_P w_P <P> P`` (dense)."""
    coeffs = np.zeros(4**paulis.n)
    np.add.at(coeffs, paulis.indices, w * expect)
    return pl.from_pauli_coefficients(coeffs, paulis.n)


def game_gradient(paulis: PauliSet, pi, amplitudes: np.ndarray) -> np.ndarray:
    """Euclidean gradient of ``sum_P pi_P (v^+ P v)^2`` with respect to ``v``,
    packed as ``d/d(Re v) + i d/d(Im v)`` (equals ``4 H v``)."""
    w = _weights(paulis, pi)
    v = np.asarray(amplitudes, dtype=complex)
    rho = np.outer(v, v.conj())
    expect = np.real(pl.pauli_expectations(rho))[paulis.indices]
    return 4 * _game_matrix(paulis, w, expect) @ v


def _top_vector(h: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return vecs[:, -1]


class _GameOperators:
    """Evaluates ``<P>_v`` over ``A`` and ``sum_P c_P P``, densely when small."""

    def __init__(self, paulis: PauliSet):
        self.paulis = paulis
        self.idx = paulis.indices
        d = 1 << paulis.n
        self.stack = None
        if len(paulis) * d * d <= 1 << 20:
            self.stack = np.stack([pl.to_dense(p) for p in paulis])

    def expectations(self, v: np.ndarray) -> np.ndarray:
        if self.stack is not None:
            return np.real(np.einsum("i,kij,j->k", v.conj(), self.stack, v))
        return np.real(pl.pauli_expectations(np.outer(v, v.conj())))[self.idx]

    def combine(self, coeffs: np.ndarray) -> np.ndarray:
        if self.stack is not None:
            return np.tensordot(coeffs, self.stack, axes=1)
        full = np.zeros(4**self.paulis.n)
        np.add.at(full, self.idx, coeffs)
        return pl.from_pauli_coefficients(full, self.paulis.n)


def _ascend(ops: _GameOperators, w: np.ndarray, v: np.ndarray, iters: int, tol: float) -> tuple[np.ndarray, float]:
    """Minorize-maximize: ``v <- top eigenvector of sum_P w_P <P>_v P``.

    The objective is convex in the density matrix, so the linearization is a
    minorizer and each step can only increase the value.
    """
    value = -1.0
    for _ in range(iters):
        expect = ops.expectations(v)
        new_value = float(w @ expect**2)
        if new_value <= value + tol:
            value = max(value, new_value)
            break
        value = new_value
        v = _top_vector(ops.combine(w * expect))
    return v, value


def best_response_state(paulis: PauliSet, pi, restarts: int, rng: np.random.Generator,
                        iters: int = 200, tol: float = 1e-12, _ops: _GameOperators | None = None) -> tuple[PureState, float]:
    """Best of ``restarts`` ascents from Haar-random starts.

    Starts are drawn one after another from ``rng``, so with equal seeds a
    larger ``restarts`` explores a superset of starts.  The returned value is
    attained by the returned state, so it lower-bounds the true maximum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    w = _weights(paulis, pi)
    check_cap(paulis.n, "best_response_state")
    ops = _ops if _ops is not None else _GameOperators(paulis)
    best_v, best_val = None, -1.0
    for _ in range(restarts):
        start = haar_random_pure(paulis.n, rng).amplitudes
        v, val = _ascend(ops, w, np.array(start), iters, tol)
        if val > best_val:
            best_v, best_val = v, val
    return PureState(best_v / np.linalg.norm(best_v)), best_val


@dataclass
class DeltaBracket:
    lower: float
    upper: float
    pi: np.ndarray
    witnesses: StateEnsemble
    iterations: int

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise AssertionError(f"bracket invariant violated: {self.lower} > {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def to_json(self, paulis: PauliSet | None = None) -> dict:
        out = {"lower": self.lower, "upper": self.upper, "width": self.width,
               "iterations": self.iterations, "witness_count": len(self.witnesses.states)}
        if paulis is not None:
            out["pi"] = {str(p): float(x) for p, x in zip(paulis, self.pi)}
        return out


def _witness_lp(sq: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """``max_q min_P sum_w q_w sq[w, P]`` with its dual distribution over ``P``."""
    W, K = sq.shape
    # variables (q_1..q_W, z); minimize -z
    c = np.zeros(W + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-sq.T, np.ones((K, 1))])
    a_eq = np.zeros((1, W + 1))
    a_eq[0, :W] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(K), A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * W + [(None, None)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"witness LP failed: {res.message}")
    q = np.clip(res.x[:W], 0, None)
    q /= q.sum()
    pi = np.clip(-res.ineqlin.marginals, 0, None)
    pi = pi / pi.sum() if pi.sum() > 0 else np.full(K, 1 / K)
    # recompute the attained value directly rather than trusting the solver objective
    return float(np.min(q @ sq)), q, pi


def delta_A_bracket(paulis: PauliSet, iterations: int = 500, rng: np.random.Generator | None = None,
                    restarts: int = 4, refine_rounds: int = 40, target_width: float = 1e-4) -> DeltaBracket:
    """Bracket ``min_pi max_psi E_{P~pi} <psi|P|psi>^2``.

    Multiplicative weights drive ``pi`` against best responses; the best
    responses seen become witness states.  ``lower`` is the witness LP value
    (achieved by an explicit mixture of those states, so it is a true lower
    bound).  ``upper`` is the smallest best-response value over the visited
    ``pi``; it is a true upper bound whenever the inner maximization is solved
    globally.  A double-oracle phase then plays best responses against the
    LP's dual ``pi`` until the gap closes.
    """
    if len(paulis) > 4096:
        raise ValueError("delta_A_bracket supports |A| <= 4096")
    rng = rng if rng is not None else np.random.default_rng(0)
    K = len(paulis)
    witnesses: list[np.ndarray] = []
    sq_rows: list[np.ndarray] = []

    ops = _GameOperators(paulis)

    def respond(pi: np.ndarray) -> float:
        psi, val = best_response_state(paulis, pi, restarts, rng, _ops=ops)
        sq = ops.expectations(psi.amplitudes) ** 2
        witnesses.append(psi.amplitudes)
        sq_rows.append(sq)
        # no visited state may beat the best response
        return max(val, float(np.max(np.array(sq_rows) @ pi)))

    pi = np.full(K, 1 / K)
    eta = math.sqrt(math.log(max(K, 2)) / max(iterations, 1))
    upper, best_pi = np.inf, pi
    steps = 0
    for _ in range(iterations):
        val = respond(pi)
        steps += 1
        if val < upper:
            upper, best_pi = val, pi.copy()
        pi = pi * np.exp(-eta * sq_rows[-1])
        pi /= pi.sum()
        if K == 1:
            break
    lower, q, dual_pi = _witness_lp(np.array(sq_rows))
    for _ in range(refine_rounds):
        if upper - lower <= target_width:
            break
        val = respond(dual_pi)
        steps += 1
        if val < upper:
            upper, best_pi = val, dual_pi.copy()
        lower, q, dual_pi = _witness_lp(np.array(sq_rows))
    keep = q > 1e-12
    ensemble = StateEnsemble([PureState(w) for w, k in zip(witnesses, keep) if k], q[keep] / q[keep].sum())
    return DeltaBracket(min(lower, upper), upper, best_pi, ensemble, steps)


def closed_form_delta(kind: str, **params):
    """Known values: ``families(m)`` -> ``1/m``; ``noncommuting(m)`` -> the interval
    ``[1/m, H_m / m]``; ``size_bound(size, n)`` -> ``2^n / size``."""
    if kind == "families":
        return 1 / params["m"]
    if kind == "noncommuting":
        m = params["m"]
        return (1 / m, sum(1 / i for i in range(1, m + 1)) / m)
    if kind == "size_bound":
        return 2 ** params["n"] / params["size"]
    raise ValueError(f"unknown kind {kind!r}")


# -- chi-squared master quantity ---------------------------------------------------

def chi2_master(paulis: PauliSet, pi, povm: Povm, c: int, eps: float) -> float:
    """``E_{P~pi} chi^2_M(rho_P^{(x)c} || rho_m^{(x)c})`` with ``rho_P = (I + 3 eps P)/2^n``.

    Expands ``(I + 3 eps P)^{(x)c}`` over subsets, so only Pauli spectra of the
    POVM elements are needed.
    """
    if c not in (1, 2):
        raise ValueError("c must be 1 or 2")
    w = _weights(paulis, pi)
    n = paulis.n
    cn = c * n
    if povm.n != cn:
        raise ValueError(f"POVM acts on {povm.n} qubits, expected {cn}")
    check_cap(cn, "chi2_master")
    phi = np.stack([np.real(pl.pauli_expectations(f)) for f in povm.elements])
    tr = np.real(np.einsum("kii->k", povm.elements))
    keep = tr > 1e-15
    phi, tr = phi[keep], tr[keep]
    total = np.zeros((len(tr), len(paulis)))
    for S in _subsets(c):
        emb = np.array([pl.embed(p, S, c).index for p in paulis])
        total += (3 * eps) ** len(S) * phi[:, emb]
    per_p = np.sum(total**2 / (2**cn * tr[:, None]), axis=0)
    return float(w @ per_p)


# -- lower-bound formulas ----------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundCard:
    n: int
    k: int
    c: int
    eps: float
    single_copy_branch: float
    memory_branch: float
    value: float
    binding: str
    unbounded_memory_branch: float
    unbounded_value: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def lower_bound_card(n: int, k: int, c: int, eps: float) -> LowerBoundCard:
    """Closed-form copy lower bounds for learning all of ``P_n`` (no constants).

    Branches are ``2^n/(c eps^2)`` and ``2^{n-k} e^{-6 c eps}/(c^3 eps^4)``; the
    unbounded-memory variant drops the ``2^{n-k}`` factor.
    """
    if n < 1 or k < 0 or c < 1 or eps <= 0:
        raise ValueError("need n >= 1, k >= 0, c >= 1, eps > 0")
    first = 2**n / (c * eps**2)
    tail = math.exp(-6 * c * eps) / (c**3 * eps**4)
    second = 2 ** (n - k) * tail
    value = min(first, second)
    binding = "1/eps^2" if first <= second else "1/eps^4"
    return LowerBoundCard(n, k, c, eps, first, second, value, binding, tail, min(first, tail))


def delta_cM_upper_from_moments(c: int, eps: float, moments) -> float:
    """``(sum_{S nonempty} (3 eps)^{|S|} sqrt(m_{|S|}))^2`` with ``moments[size]`` the
    bound on the second moment for subsets of that size."""
    total = 0.0
    for size in range(1, c + 1):
        m = moments[size] if not callable(moments) else moments(size)
        total += math.comb(c, size) * (3 * eps) ** size * math.sqrt(m)
    return total**2


# -- matrix product states --------------------------------------------------------

@dataclass
class MpsState:
    """``c`` sites of dimension ``2^n``, bond dimension at most ``2^k``."""

    n: int
    k: int
    c: int
    tensors: list[np.ndarray]  # each (left bond, 2^n, right bond)

    def vector(self) -> np.ndarray:
        out = self.tensors[0].reshape(-1, self.tensors[0].shape[-1])
        for t in self.tensors[1:]:
            out = (out @ t.reshape(t.shape[0], -1)).reshape(-1, t.shape[-1])
        return out.reshape(-1)

    def schmidt_ranks(self, tol: float = 1e-10) -> list[int]:
        if self.c * self.n > 12:
            raise ValueError("Schmidt check limited to 12 qubits")
        v = self.vector()
        d = 1 << self.n
        ranks = []
        for r in range(1, self.c):
            s = np.linalg.svd(v.reshape(d**r, -1), compute_uv=False)
            ranks.append(int(np.sum(s > tol * s[0])))
        return ranks


def random_mps(n: int, k: int, c: int, rng: np.random.Generator) -> MpsState:
    """Random Gaussian site tensors, left-orthonormalized by QR, then normalized."""
    if c < 1:
        raise ValueError("c must be >= 1")
    d, D = 1 << n, 1 << k
    bonds = [1] + [min(D, d**i, d ** (c - i)) for i in range(1, c)] + [1]
    tensors = []
    for i in range(c):
        shape = (bonds[i], d, bonds[i + 1])
        t = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if i < c - 1:
            q, _ = np.linalg.qr(t.reshape(bonds[i] * d, bonds[i + 1]))
            t = q.reshape(shape)
        else:
            t = t / np.linalg.norm(t)
        tensors.append(t)
    return MpsState(n, k, c, tensors)


def _apply_on_sites(vec: np.ndarray, op: np.ndarray, sites: Sequence[int], c: int, d: int) -> np.ndarray:
    t = vec.reshape((d,) * c)
    for j in sites:
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [j - 1])), 0, j - 1)
    return t.reshape(-1)


def pauli_second_moment(vec: np.ndarray, n: int, c: int, sites: Sequence[int]) -> float:
    """``4^{-n} sum_P <v|P^S|v>^2`` for a ``c``-site vector of ``n``-qubit sites."""
    d = 1 << n
    total = 0.0
    for a in range(4**n):
        op = pl.to_dense(PauliString.from_index(n, a))
        val = np.vdot(vec, _apply_on_sites(vec, op, sites, c, d))
        total += float(np.real(val)) ** 2
    return total / 4**n


def verify_mps_pauli_bound(n: int, k: int, c: int, sites: Sequence[int], trials: int,
                           rng: np.random.Generator, tol: float = 1e-9) -> float:
    """Largest observed ``4^{-n} sum_P <psi|P^S|psi>^2`` over random MPS; raises on
    any value above ``2^{k-n}`` (``2^{-n}`` when ``|S| = 1``)."""
    sites = sorted(set(sites))
    if not sites or not set(sites) <= set(range(1, c + 1)):
        raise ValueError("sites must be a nonempty subset of 1..c")
    if c * n > 12:
        raise ValueError("dense verification limited to 12 qubits")
    bound = 2.0 ** (-n) if len(sites) == 1 else 2.0 ** (min(k, n) - n)
    worst = 0.0
    for _ in range(trials):
        state = random_mps(n, k, c, rng)
        val = pauli_second_moment(state.vector(), n, c, sites)
        worst = max(worst, val)
        if val > bound + tol:
            raise VerificationError(f"MPS moment {val} exceeds {bound}", state)
    return worst


@lru_cache(maxsize=None)
def symmetrizer(T: int, d: int) -> np.ndarray:
    """``S_T = sum over all permutations of T qudits of dimension d``."""
    if not 1 <= T <= 4:
        raise ValueError("T must be between 1 and 4")
    dim = d**T
    digits = np.array(list(itertools.product(range(d), repeat=T)))
    weights = d ** np.arange(T - 1, -1, -1)
    out = np.zeros((dim, dim))
    for perm in itertools.permutations(range(T)):
        target = digits[:, list(perm)] @ weights
        out[target, np.arange(dim)] += 1
    out.setflags(write=False)
    return out


def symmetrizer_trace(T: int, d: int) -> int:
    """``tr S_T = d (d+1) ... (d+T-1)``."""
    return math.prod(d + i for i in range(T))


def _wishart(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w = g @ g.conj().T
    return w / np.trace(w).real


def verify_permutation_inequality(x: int, y: int, d: int, trials: int, rng: np.random.Generator,
                                  tol: float = 1e-9) -> float:
    """Smallest observed ``tr(r_x (x) r_y S_{x+y}) - tr(r_x S_x) tr(r_y S_y)``."""
    if d ** (x + y) > 4096 or x < 1 or y < 1:
        raise ValueError("need x, y >= 1 and d^(x+y) <= 4096")
    s_xy, s_x, s_y = symmetrizer(x + y, d), symmetrizer(x, d), symmetrizer(y, d)
    for T, s in ((x + y, s_xy), (x, s_x), (y, s_y)):
        if round(np.trace(s)) != symmetrizer_trace(T, d):
            raise VerificationError(f"tr S_{T} mismatch")
        proj = s / math.factorial(T)
        if np.max(np.abs(proj @ proj - proj)) > 1e-9:
            raise VerificationError(f"S_{T}/{T}! is not a projector")
    worst = np.inf
    for _ in range(trials):
        rx, ry = _wishart(d**x, rng), _wishart(d**y, rng)
        lhs = np.real(np.trace(np.kron(rx, ry) @ s_xy))
        rhs = np.real(np.trace(rx @ s_x)) * np.real(np.trace(ry @ s_y))
        slack = lhs - rhs
        worst = min(worst, slack)
        if slack < -tol:
            raise VerificationError(f"permutation inequality violated by {slack}", (rx, ry))
    return float(worst)


def _isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, _ = np.linalg.qr(g)
    return q


def swap_operator(n: int) -> np.ndarray:
    d = 1 << n
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    out = np.zeros((d * d, d * d))
    out[(j * d + i).ravel(), (i * d + j).ravel()] = 1
    return out


def random_memory_povm(n: int, k: int, rng: np.random.Generator, extra: int = 2) -> np.ndarray:
    """Rank-1 elements of a random two-copy POVM with ``k`` qubits of memory.

    Copy one goes through Kraus operators ``N_{s1}`` (``2^k x 2^n`` blocks of a
    random isometry); the memory and copy two are then measured with a random
    rank-1 POVM.  Returns the unnormalized vectors ``(N_{s1}^+ (x) I)|w>``.
    """
    d, D = 1 << n, 1 << k
    r1 = -(-d // D) + int(rng.integers(0, extra + 1))
    v = _isometry(r1 * D, d, rng)
    vectors = []
    for s1 in range(r1):
        kraus = v[s1 * D:(s1 + 1) * D]
        r2 = D * d + int(rng.integers(0, extra + 1))
        w = _isometry(r2, D * d, rng)
        lift = np.kron(kraus.conj().T, np.eye(d))
        for s2 in range(r2):
            vectors.append(lift @ w[s2].conj())
    return np.array(vectors)


def verify_swap_bound(n: int, k: int, trials: int, rng: np.random.Generator, tol: float = 1e-6) -> float:
    """Largest observed ``sum_s tr(F_s SWAP)^2 / tr(F_s)`` over random memory-``k``
    two-copy POVMs; raises on any value above ``2^{k+n}``."""
    check_cap(2 * n, "verify_swap_bound")
    swap = swap_operator(n)
    bound = 2.0 ** (k + n)
    worst = 0.0
    for _ in range(trials):
        vecs = random_memory_povm(n, k, rng)
        norms = np.real(np.einsum("si,si->s", vecs.conj(), vecs))
        overlaps = np.real(np.einsum("si,ij,sj->s", vecs.conj(), swap, vecs))
        keep = norms > 1e-15
        val = float(np.sum(overlaps[keep] ** 2 / norms[keep]))
        worst = max(worst, val)
        if val > bound + tol:
            raise VerificationError(f"SWAP sum {val} exceeds {bound}", vecs)
    return worst


# -- identity suites and dispatch ----------------------------------------------------

def verify_pauli_identities(n_max: int, trials: int, rng: np.random.Generator,
                            tol_swap: float = 1e-12, tol_twirl: float = 1e-10) -> dict:
    """``sum_P P (x) P = 2^n SWAP`` exhaustively and ``sum_P P B P = 2^n tr(B) I`` on
    random complex ``B``, for every ``n <= n_max``.  Returns the worst deviations."""
    worst_swap = worst_twirl = 0.0
    for n in range(1, n_max + 1):
        d = 1 << n
        mats = [pl.to_dense(PauliString.from_index(n, a)) for a in range(4**n)]
        total = sum(np.kron(m, m) for m in mats)
        dev = float(np.max(np.abs(total - d * swap_operator(n))))
        worst_swap = max(worst_swap, dev)
        if dev > tol_swap:
            raise VerificationError(f"sum P(x)P deviates by {dev} at n={n}")
        for _ in range(trials):
            b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            twirl = sum(m @ b @ m for m in mats)
            dev = float(np.max(np.abs(twirl - d * np.trace(b) * np.eye(d))))
            worst_twirl = max(worst_twirl, dev)
            if dev > tol_twirl:
                raise VerificationError(f"sum PBP deviates by {dev} at n={n}", b)
    return {"swap": worst_swap, "twirl": worst_twirl}


def verify_chi2_clifford(n: int, eps: float, tol: float = 1e-12) -> float:
    """For every family of the covering and every nontrivial ``P``, the Clifford
    POVM gives ``chi^2(rho_P || rho_m) = 9 eps^2 [P in family]``."""
    check_cap(n, "verify_chi2_clifford")
    mixed = maximally_mixed(n)
    states = [rho_p(PauliString.from_index(n, a), eps) for a in range(1, 4**n)]
    worst = 0.0
    for group in stabilizer_covering(n).groups:
        povm = clifford_povm(group)
        members = group.element_set()
        for a, rho in zip(range(1, 4**n), states):
            expected = 9 * eps**2 if a in members else 0.0
            dev = abs(chi2_divergence(povm, rho, mixed) - expected)
            worst = max(worst, dev)
            if dev > tol:
                raise VerificationError(f"chi2 mismatch {dev} for index {a}")
    return worst


SUITES = ("pauli-identities", "mps-bound", "permutation", "swap-bound", "chi2-clifford")


def run_suite(name: str, trials: int, rng: np.random.Generator, n: int = 2,
              ks: Sequence[int] | None = None, eps: float = 0.1) -> dict:
    """Run one verifier suite with its default parameter grid; raises
    :class:`VerificationError` on the first violation."""
    ks = list(range(n + 1)) if ks is None else list(ks)
    if name == "pauli-identities":
        return verify_pauli_identities(min(n, 3) if n else 3, trials, rng)
    if name == "mps-bound":
        return {f"k={k}": verify_mps_pauli_bound(n, k, 2, [1, 2], trials, rng) for k in ks}
    if name == "permutation":
        pairs = [(x, y) for x in range(1, 4) for y in range(1, 4) if x + y <= 4]
        return {f"x={x},y={y}": verify_permutation_inequality(x, y, 2, trials, rng) for x, y in pairs}
    if name == "swap-bound":
        return {f"k={k}": verify_swap_bound(n, k, trials, rng) for k in ks}
    if name == "chi2-clifford":
        return {"max_deviation": verify_chi2_clifford(n, eps)}
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
