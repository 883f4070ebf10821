"""Learning protocols, simulated exactly from outcome distributions.

Every protocol samples outcome *counts* from the exact distribution (which is
equivalent to drawing the rounds one by one, since no protocol here adapts
between rounds) and then forms its estimators with Walsh transforms of the
count vectors.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import pauli as pl
from .coloring import MeasurementPlan
from .pauli import PauliSet
from .quantum import (DensityMatrix, Povm, as_density, bell_distribution,
                      make_rng, normalize_probabilities, pauli_spectrum,
                      purity_event_probability)
from .stabilizer import eigenbasis, stabilizer_covering


class ProtocolError(ValueError):
    """Invalid protocol inputs."""


@dataclass
class Budgets:
    """Constants of the default round budgets (natural logarithms throughout)."""

    nomem_const: float = 16.0
    nomem_log_mult: float = 30.0
    clifford_const: float = 16.0
    clifford_log_mult: float = 30.0
    bell_const: float = 8.0
    bell_log_mult: float = 30.0
    sign_const: float = 2.0
    sign_log_mult: float = 20.0
    kmem_const: float = 2.0
    kmem_log_mult: float = 20.0
    purity_reps: int = 10
    oblivious_const: float = 5.0

    @classmethod
    def from_dict(cls, data: dict) -> "Budgets":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ProtocolError(f"unknown budget keys: {sorted(unknown)}")
        return cls(**data)


DEFAULT_BUDGETS = Budgets()


def nomem_rounds(size: int, eps: float, delta: float, b: Budgets = DEFAULT_BUDGETS) -> int:
    return math.ceil(b.nomem_const * math.log(b.nomem_log_mult * size) / (eps**2 * delta))


def clifford_rounds(size: int, eps: float, zeta: float, b: Budgets = DEFAULT_BUDGETS) -> int:
    return math.ceil(b.clifford_const * math.log(b.clifford_log_mult * size) * zeta / eps**2)


def bell_rounds(size: int, eps: float, b: Budgets = DEFAULT_BUDGETS) -> int:
    return math.ceil(b.bell_const * math.log(b.bell_log_mult * size) / eps**4)


def sign_rounds(size: int, eps: float, b: Budgets = DEFAULT_BUDGETS) -> int:
    """Hoeffding for +-1 averages at accuracy ``eps^2`` and failure ``1/(10|A|)``."""
    return math.ceil(b.sign_const * math.log(b.sign_log_mult * size) / eps**4)


def kmem_rounds(n: int, k: int, eps: float, b: Budgets = DEFAULT_BUDGETS) -> int:
    """Rounds per covering group so every squared amplitude is within ``(eps/3)^2``."""
    m = n - k
    estimates = ((1 << m) + 1) * 4**k * (1 << m)
    return math.ceil(b.kmem_const * math.log(b.kmem_log_mult * estimates) / (eps / 3) ** 4)


# -- reports -----------------------------------------------------------------

@dataclass
class ProtocolReport:
    protocol: str
    paulis: list[str]
    estimates: np.ndarray
    targets: np.ndarray | None
    rounds: int
    copies: int
    seed: int | None = None
    wall_time: float = 0.0
    flags: dict[str, str] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def errors(self) -> np.ndarray | None:
        if self.targets is None:
            return None
        return np.abs(self.estimates - self.targets)

    def max_error(self) -> float:
        err = self.errors
        if err is None or len(err) == 0:
            return float("nan")
        return float(np.max(np.where(np.isnan(err), np.inf, err)))

    def to_json(self) -> dict:
        def clean(a):
            return None if a is None else [None if np.isnan(v) else float(v) for v in np.asarray(a, float)]

        out = {
            "protocol": self.protocol,
            "seed": self.seed,
            "rounds": int(self.rounds),
            "copies": int(self.copies),
            "wall_time": self.wall_time,
            "max_error": None if self.targets is None else self.max_error(),
            "paulis": self.paulis,
            "estimates": clean(self.estimates),
            "targets": clean(self.targets),
            "flags": self.flags,
        }
        for key, val in self.extra.items():
            out[key] = clean(val) if isinstance(val, np.ndarray) else val
        return out


def _resolve_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise ProtocolError("an rng or integer seed is required")
    return make_rng(int(rng)), int(rng)


def _as_set(paulis) -> PauliSet:
    return paulis if isinstance(paulis, PauliSet) else PauliSet(paulis)


def _targets(paulis: PauliSet, spectrum: np.ndarray) -> np.ndarray:
    return spectrum[paulis.indices]


# -- ensembles -----------------------------------------------------------------

@dataclass
class StateEnsemble:
    """States ``psi_l`` drawn with probabilities ``q_l``."""

    states: list
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if not self.states or len(self.states) != len(self.weights):
            raise ProtocolError("ensemble needs one weight per state")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1) > 1e-9:
            raise ProtocolError("ensemble weights must form a distribution")
        if len({s.n for s in self.states}) != 1:
            raise ProtocolError("ensemble states differ in qubit count")

    @property
    def n(self) -> int:
        return self.states[0].n

    def spectra(self) -> np.ndarray:
        return np.stack([pauli_spectrum(s) for s in self.states])

    def delta(self, paulis: PauliSet) -> float:
        """``min_P E_l tr(P psi_l)^2``; the game value this ensemble guarantees."""
        sq = self.spectra()[:, paulis.indices] ** 2
        return float(np.min(self.weights @ sq))

    @classmethod
    def uniform(cls, states: Sequence) -> "StateEnsemble":
        return cls(list(states), np.full(len(states), 1 / len(states)))


@dataclass
class PovmEnsemble:
    """POVMs ``M_l`` drawn with probabilities ``q_l``."""

    povms: list[Povm]
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if not self.povms or len(self.povms) != len(self.weights):
            raise ProtocolError("ensemble needs one weight per POVM")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1) > 1e-9:
            raise ProtocolError("ensemble weights must form a distribution")
        if len({p.n for p in self.povms}) != 1:
            raise ProtocolError("ensemble POVMs differ in qubit count")


# -- memory-free -------------------------------------------------------------

def no_memory_protocol(paulis, ensemble: StateEnsemble, rho: DensityMatrix, T: int | None = None,
                       eps: float | None = None, rng=None, budgets: Budgets = DEFAULT_BUDGETS
                       ) -> ProtocolReport:
    """Measure ``{2^{-n} Q psi_l Q}_Q`` with ``l`` drawn from the ensemble each round."""
    start = time.perf_counter()
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    n = rho.n
    if ensemble.n != n or paulis.n != n:
        raise ProtocolError("ensemble, set and state must share n")
    if T is None:
        if eps is None:
            raise ProtocolError("need T or eps")
        T = nomem_rounds(len(paulis), eps, ensemble.delta(paulis), budgets)
    if T < 1:
        raise ProtocolError("T must be positive")
    lam = pauli_spectrum(rho)
    spectra = ensemble.spectra()
    idx = paulis.indices
    per_state = rng.multinomial(T, ensemble.weights)
    num = np.zeros(len(paulis))
    den = np.zeros(len(paulis))
    for l, t_l in enumerate(per_state):
        if t_l == 0:
            continue
        probs = normalize_probabilities(pl.symplectic_walsh(spectra[l] * lam, n) / 4**n)
        counts = rng.multinomial(t_l, probs)
        signed = pl.symplectic_walsh(counts.astype(float), n)[idx]
        coeff = spectra[l][idx]
        num += coeff * signed
        den += t_l * coeff**2
    flags = {}
    est = np.full(len(paulis), np.nan)
    ok = den > 1e-12
    est[ok] = num[ok] / den[ok]
    for i in np.flatnonzero(~ok):
        flags[str(paulis[i])] = "uninformative ensemble for P"
    return ProtocolReport("nomem", paulis.labels(), est, _targets(paulis, lam), T, T, seed,
                          time.perf_counter() - start, flags)


def clifford_protocol(paulis, plan: MeasurementPlan, rho: DensityMatrix, T: int | None = None,
                      rng=None, eps: float | None = None, budgets: Budgets = DEFAULT_BUDGETS
                      ) -> ProtocolReport:
    """Measure the scheduled families at their frequencies and average eigenvalue readouts."""
    start = time.perf_counter()
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    if T is None:
        if eps is None:
            raise ProtocolError("need T or eps")
        T = clifford_rounds(len(paulis), eps, plan.total_weight, budgets)
    lam = pauli_spectrum(rho)
    pos = {p.index: i for i, p in enumerate(paulis)}
    total = np.zeros(len(paulis))
    seen = np.zeros(len(paulis), dtype=np.int64)
    per_family = rng.multinomial(T, plan.frequencies())
    for entry, t_i in zip(plan.entries, per_family):
        if t_i == 0:
            continue
        basis = eigenbasis(entry.family)
        counts = rng.multinomial(t_i, basis.probabilities(lam))
        sums = counts @ basis.readout()
        for j, a in enumerate(entry.family.elements):
            i = pos.get(int(a))
            if i is not None:
                total[i] += sums[j]
                seen[i] += t_i
    est = np.full(len(paulis), np.nan)
    est[seen > 0] = total[seen > 0] / seen[seen > 0]
    flags = {str(paulis[i]): "missing: never measured" for i in np.flatnonzero(seen == 0)}
    return ProtocolReport("clifford", paulis.labels(), est, _targets(paulis, lam), T, T, seed,
                          time.perf_counter() - start, flags, {"times_measured": seen.tolist()})


# -- two-copy Bell -------------------------------------------------------------

def _bell_averages(counts: np.ndarray, n: int, idx: np.ndarray) -> np.ndarray:
    """Mean of ``mu(P, Q)`` over the recorded ``Q`` for every index in ``idx``."""
    signed = pl.symplectic_walsh(counts.astype(float), n)
    return pl.y_signs(n)[idx] * signed[idx] / counts.sum()


def bell_abs_protocol(paulis, rho: DensityMatrix, T: int | None = None, rng=None,
                      eps: float | None = None, budgets: Budgets = DEFAULT_BUDGETS
                      ) -> ProtocolReport:
    """Estimate ``|tr(P rho)|`` from Bell measurements on ``rho (x) rho``."""
    start = time.perf_counter()
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    if T is None:
        if eps is None:
            raise ProtocolError("need T or eps")
        T = bell_rounds(len(paulis), eps, budgets)
    if T < 1:
        raise ProtocolError("T must be positive")
    lam = pauli_spectrum(rho)
    counts = rng.multinomial(T, bell_distribution(lam, lam))
    squared = _bell_averages(counts, rho.n, paulis.indices)
    est = np.sqrt(np.clip(squared, 0.0, 1.0))
    return ProtocolReport("bell", paulis.labels(), est, np.abs(_targets(paulis, lam)), T, 2 * T,
                          seed, time.perf_counter() - start, extra={"squared": squared})


def find_sign_reference(paulis: PauliSet, f: np.ndarray, eps: float, rng: np.random.Generator,
                        rank: int | None = None, restarts: int = 20) -> tuple[DensityMatrix | None, float]:
    """Search for a state whose absolute Pauli expectations match ``f`` within ``eps``.

    Minimizes ``sum_P (tr(P s)^2 - f_P^2)^2`` over ``s = G G^+ / tr(G G^+)`` from
    random starts.  Returns ``(state, worst mismatch)``; the state is ``None``
    when no start got within ``eps``.
    """
    n = paulis.n
    d = 1 << n
    r = rank or d
    idx = paulis.indices
    f = np.asarray(f, dtype=float)

    def state(theta):
        g = (theta[: d * r] + 1j * theta[d * r:]).reshape(d, r)
        w = g @ g.conj().T
        return w / np.trace(w).real

    def loss(theta):
        t = np.real(pl.pauli_expectations(state(theta)))[idx]
        return float(np.sum((t**2 - f**2) ** 2))

    best, best_gap = None, np.inf
    for _ in range(restarts):
        res = optimize.minimize(loss, rng.standard_normal(2 * d * r), method="L-BFGS-B")
        sigma = state(res.x)
        gap = float(np.max(np.abs(f - np.abs(np.real(pl.pauli_expectations(sigma))[idx]))))
        if gap < best_gap:
            best, best_gap = sigma, gap
        if best_gap <= eps:
            break
    if best_gap > eps:
        return None, best_gap
    return DensityMatrix((best + best.conj().T) / 2), best_gap


def sign_recovery(paulis, f, rho: DensityMatrix, eps: float, rng=None, sigma_mode: str = "oracle",
                  T: int | None = None, sigma: DensityMatrix | None = None,
                  budgets: Budgets = DEFAULT_BUDGETS) -> ProtocolReport:
    """Turn absolute-value estimates ``f`` into signed estimates (error at most ``3 eps``).

    A reference state ``sigma`` with ``|tr(P sigma)|`` close to ``f`` is Bell
    measured against ``rho`` (a single-copy POVM on ``rho``); the product
    ``tr(P sigma) tr(P rho)`` is then divided by the known ``tr(P sigma)``.
    """
    start = time.perf_counter()
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    f = np.asarray(f, dtype=float)
    if len(f) != len(paulis):
        raise ProtocolError("one absolute estimate per Pauli is required")
    lam = pauli_spectrum(rho)
    flags = {}
    if sigma is None:
        if sigma_mode == "oracle":
            sigma = rho
        elif sigma_mode == "search":
            sigma, gap = find_sign_reference(paulis, f, eps, rng)
            if sigma is None:
                flags["sigma"] = f"search failed: best mismatch {gap:.3g} > eps"
        else:
            raise ProtocolError(f"unknown sigma_mode {sigma_mode!r}")
    if T is None:
        T = sign_rounds(len(paulis), eps, budgets)
    idx = paulis.indices
    est = np.zeros(len(paulis))
    if sigma is None:
        est[:] = np.nan
        return ProtocolReport("sign", paulis.labels(), est, _targets(paulis, lam), 0, 0, seed,
                              time.perf_counter() - start, flags)
    lam_sigma = pauli_spectrum(sigma)
    counts = rng.multinomial(T, bell_distribution(lam_sigma, lam))
    g = _bell_averages(counts, rho.n, idx)
    big = f >= 2 * eps
    est[big] = g[big] / lam_sigma[idx][big]
    return ProtocolReport("sign", paulis.labels(), est, _targets(paulis, lam), T, T, seed,
                          time.perf_counter() - start, flags, {"products": g})


def two_copy_full(paulis, rho: DensityMatrix, eps: float, rng=None, sigma_mode: str = "oracle",
                  budgets: Budgets = DEFAULT_BUDGETS) -> ProtocolReport:
    """Absolute values from Bell sampling at ``eps/3``, then sign recovery at ``eps/3``."""
    start = time.perf_counter()
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    first = bell_abs_protocol(paulis, rho, eps=eps / 3, rng=rng, budgets=budgets)
    second = sign_recovery(paulis, first.estimates, rho, eps / 3, rng=rng, sigma_mode=sigma_mode,
                           budgets=budgets)
    return ProtocolReport("twocopy", paulis.labels(), second.estimates, second.targets,
                          first.rounds + second.rounds, first.copies + second.copies, seed,
                          time.perf_counter() - start, second.flags,
                          {"abs_estimates": first.estimates, "bell_copies": first.copies,
                           "sign_copies": second.copies})


# -- k-memory hybrid -----------------------------------------------------------

def kmem_outcome_distribution(spectrum: np.ndarray, k: int, group) -> np.ndarray:
    """``p[v, e, e']`` for Bell outcome ``v`` on the first ``k`` qubits of both copies and
    eigenbasis outcomes ``e, e'`` of ``group`` on the remaining qubits of each copy.

    ``e`` indexes ``eigenbasis(group).coset_reps``.
    """
    spectrum = np.asarray(spectrum, dtype=float)
    n = (len(spectrum).bit_length() - 1) // 2
    m = n - k
    basis = eigenbasis(group)
    elements = group.elements
    # g[u, e] = sum_s lambda_{(u, s)} chi(s) (-1)^{<e, s>}
    lam_us = spectrum.reshape(4**k, 4**m)[:, elements]
    g = lam_us @ basis.readout().T
    outer = g[:, :, None] * g[:, None, :]
    weighted = pl.y_signs(k)[:, None, None] * outer
    p = pl.symplectic_walsh(np.moveaxis(weighted, 0, -1), k) / 4**n
    p = np.moveaxis(p, -1, 0)
    return normalize_probabilities(p.reshape(-1)).reshape(p.shape)


def kmem_square_estimates(counts: np.ndarray, k: int, group) -> np.ndarray:
    """Sums (not means) of the sign estimator for every ``(u, s)``; shape ``(4^k, |S|)``."""
    basis = eigenbasis(group)
    # walsh over v gives sum_v counts (-1)^{<u, v>}; mu adds the Y sign of u
    w = pl.symplectic_walsh(np.moveaxis(counts.astype(float), 0, -1), k)
    w = np.moveaxis(w, -1, 0) * pl.y_signs(k)[:, None, None]
    r = basis.sign_table.astype(float)
    return np.einsum("uef,ej,fj->uj", w, r, r)


def k_memory_protocol(rho: DensityMatrix, k: int, eps: float, rounds_per_group: int | None = None,
                      rng=None, recover_signs: bool = True, budgets: Budgets = DEFAULT_BUDGETS
                      ) -> ProtocolReport:
    """Estimate every Pauli expectation with ``k`` qubits of memory per copy pair."""
    start = time.perf_counter()
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    n = rho.n
    if not 0 <= k <= n:
        raise ProtocolError(f"k={k} outside 0..{n}")
    m = n - k
    R = rounds_per_group or kmem_rounds(n, k, eps, budgets)
    lam = pauli_spectrum(rho)
    covering = stabilizer_covering(m)
    sums = np.zeros(4**n)
    uses = np.zeros(4**n, dtype=np.int64)
    for group in covering.groups:
        p = kmem_outcome_distribution(lam, k, group)
        counts = rng.multinomial(R, p.reshape(-1)).reshape(p.shape)
        est = kmem_square_estimates(counts, k, group)
        full = (np.arange(4**k)[:, None] * 4**m + group.elements[None, :]).reshape(-1)
        sums[full] += est.reshape(-1)
        uses[full] += R
    squared = sums / uses
    absolute = np.sqrt(np.clip(squared, 0.0, 1.0))
    paulis = PauliSet.all(n)
    rounds = R * len(covering)
    copies = 2 * rounds
    extra = {"squared": squared, "abs_estimates": absolute, "groups": len(covering),
             "rounds_per_group": R, "abs_targets": np.abs(lam)}
    estimates = absolute
    flags = {}
    if recover_signs:
        signed = sign_recovery(paulis, absolute, rho, eps / 3, rng=rng, budgets=budgets)
        estimates = signed.estimates
        rounds += signed.rounds
        copies += signed.copies
        extra["sign_copies"] = signed.copies
        flags = signed.flags
    targets = lam if recover_signs else np.abs(lam)
    return ProtocolReport("kmem", paulis.labels(), estimates, targets, rounds, copies, seed,
                          time.perf_counter() - start, flags, extra)


# -- generic (c, M) estimator --------------------------------------------------

def _subsets(c: int) -> list[tuple[int, ...]]:
    return [s for size in range(1, c + 1) for s in combinations(range(1, c + 1), size)]


@dataclass
class _EnsembleTables:
    """Pauli spectra ``phi[l][s, a] = tr(F_{l,s} P_a)`` and element traces."""

    phi: list[np.ndarray]
    traces: list[np.ndarray]


def _ensemble_tables(ensemble: PovmEnsemble) -> _EnsembleTables:
    phi, traces = [], []
    for povm in ensemble.povms:
        phi.append(np.stack([np.real(pl.pauli_expectations(f)) for f in povm.elements]))
        traces.append(np.real(np.einsum("kii->k", povm.elements)))
    return _EnsembleTables(phi, traces)


def moment_table(paulis: PauliSet, ensemble: PovmEnsemble, c: int,
                 tables: _EnsembleTables | None = None) -> tuple[np.ndarray, list]:
    """``mu[i, j] = E_l sum_s tr(F_{l,s} P_i^{S_j})^2 / (2^{cn} tr F_{l,s})`` and the subsets ``S_j``."""
    tables = tables or _ensemble_tables(ensemble)
    subsets = _subsets(c)
    n = paulis.n
    mu = np.zeros((len(paulis), len(subsets)))
    for j, S in enumerate(subsets):
        emb = np.array([pl.embed(p, S, c).index for p in paulis])
        for q, phi, tr in zip(ensemble.weights, tables.phi, tables.traces):
            keep = tr > 1e-15
            mu[:, j] += q * np.sum(phi[keep][:, emb] ** 2 / (2 ** (c * n) * tr[keep, None]), axis=0)
    return mu, subsets


def select_subsets(mu: np.ndarray, subsets: list, eps: float) -> np.ndarray:
    """Position of ``argmax (eps/3)^{2|S|} mu(P, S)``; ties go to the earliest subset
    (smaller size first, then lexicographic)."""
    score = mu * np.array([(eps / 3) ** (2 * len(S)) for S in subsets])[None, :]
    return np.argmax(score, axis=1)


def generic_conditional_q_distribution(phi_row: np.ndarray, trace: float, spectrum_c: np.ndarray,
                                       cn: int) -> np.ndarray:
    """``Pr[Q | l, s] = tr(Q F Q rho^{(x)c}) / (2^{cn} tr F)`` over every ``cn``-qubit ``Q``."""
    raw = pl.symplectic_walsh(phi_row * spectrum_c, cn) / (4**cn * trace)
    return normalize_probabilities(raw)


def generic_cm_estimator(paulis, ensemble: PovmEnsemble, c: int, rho: DensityMatrix, eps: float,
                         T: int, rng=None) -> ProtocolReport:
    """Reweighted commutation-indicator estimator with Pauli-twirled POVMs.

    Each round draws ``l``, a uniform ``Q`` on ``cn`` qubits and measures
    ``rho^{(x)c}`` with ``{Q F_{l,s} Q}``.  For every ``P`` the subset ``S_P``
    maximizing ``(eps/3)^{2|S|} mu(P, S)`` is used, and the report holds
    ``|E|^{1/|S_P|}`` (signed when ``|S_P| = 1``).
    """
    start = time.perf_counter()
    if c not in (1, 2):
        raise ProtocolError("c must be 1 or 2")
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    n = rho.n
    cn = c * n
    if ensemble.povms[0].n != cn:
        raise ProtocolError(f"POVMs must act on {cn} qubits")
    lam = pauli_spectrum(rho)
    lam_c = lam
    for _ in range(c - 1):
        lam_c = np.kron(lam_c, lam)
    tables = _ensemble_tables(ensemble)
    mu, subsets = moment_table(paulis, ensemble, c, tables)
    choice = select_subsets(mu, subsets, eps)
    emb = np.array([pl.embed(p, subsets[j], c).index for p, j in zip(paulis, choice)])
    # joint (l, s) draw
    pls = np.concatenate([q * tr / 2**cn for q, tr in zip(ensemble.weights, tables.traces)])
    ls_counts = rng.multinomial(T, normalize_probabilities(pls))
    num = np.zeros(len(paulis))
    den = np.zeros(len(paulis))
    pos = 0
    for phi, tr in zip(tables.phi, tables.traces):
        for s in range(len(tr)):
            count = ls_counts[pos]
            pos += 1
            if count == 0:
                continue
            q_counts = rng.multinomial(count, generic_conditional_q_distribution(phi[s], tr[s], lam_c, cn))
            signed = pl.symplectic_walsh(q_counts.astype(float), cn)[emb]
            w = phi[s][emb] / tr[s]
            num += w * signed
            den += count * w**2
    raw = np.full(len(paulis), np.nan)
    ok = den > 1e-15
    raw[ok] = num[ok] / den[ok]
    sizes = np.array([len(subsets[j]) for j in choice])
    absolute = np.abs(raw) ** (1.0 / sizes)
    est = np.where(sizes == 1, raw, absolute)
    flags = {}
    for i in np.flatnonzero(mu.max(axis=1) <= 0):
        flags[str(paulis[i])] = "ensemble uninformative for P"
    for i in np.flatnonzero(~ok & (mu.max(axis=1) > 0)):
        flags.setdefault(str(paulis[i]), "no informative rounds observed")
    targets = np.where(sizes == 1, lam[paulis.indices], np.abs(lam[paulis.indices]))
    return ProtocolReport("generic", paulis.labels(), est, targets, T, c * T, seed,
                          time.perf_counter() - start, flags,
                          {"raw": raw, "abs_estimates": absolute,
                           "subsets": [list(subsets[j]) for j in choice], "mu": mu.tolist()})


# -- purity --------------------------------------------------------------------

@dataclass
class PurityVerdict:
    verdict: str
    repetitions: int
    copies: int
    successes: int
    event_probability: float
    seed: int | None = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def purity_trajectory_event(rho: DensityMatrix, k: int, rng: np.random.Generator) -> bool:
    """One repetition simulated step by step: measure the first ``n - k`` qubits
    of both copies, then swap-test the post-measurement states."""
    n = rho.n
    blocks = rho.matrix.reshape(1 << (n - k), 1 << k, 1 << (n - k), 1 << k)
    marg = normalize_probabilities(np.real(np.einsum("xixi->x", blocks)))
    x1, x2 = rng.choice(len(marg), size=2, p=marg)
    if x1 != x2:
        return False
    post = blocks[x1, :, x1, :] / marg[x1]
    anti = (1 - np.real(np.trace(post @ post))) / 2
    return bool(rng.random() < anti)


def purity_test_k(rho: DensityMatrix, k: int, rng=None, repetitions: int | None = None,
                  mode: str = "bernoulli", budgets: Budgets = DEFAULT_BUDGETS) -> PurityVerdict:
    """Declare ``mixed`` iff some repetition has matching outcomes and an antisymmetric swap test."""
    rng, seed = _resolve_rng(rng)
    rho = as_density(rho)
    n = rho.n
    if not 0 <= k <= n:
        raise ProtocolError(f"k={k} outside 0..{n}")
    reps = repetitions if repetitions is not None else budgets.purity_reps * 2 ** (n - k)
    p = purity_event_probability(rho, k)
    if mode == "bernoulli":
        successes = int(rng.binomial(reps, min(max(p, 0.0), 1.0)))
    elif mode == "trajectory":
        successes = sum(purity_trajectory_event(rho, k, rng) for _ in range(reps))
    else:
        raise ProtocolError(f"unknown mode {mode!r}")
    return PurityVerdict("mixed" if successes else "pure", reps, 2 * reps, successes, p, seed)


# -- amplification -------------------------------------------------------------

def median_amplify(estimates: Sequence[float]) -> float:
    """Lower median."""
    values = sorted(estimates)
    if not values:
        raise ValueError("median of an empty list")
    return values[(len(values) - 1) // 2]


def oblivious_wrapper(protocol: Callable[..., ProtocolReport], paulis, rho: DensityMatrix, rng=None,
                      repetitions: int | None = None, budgets: Budgets = DEFAULT_BUDGETS
                      ) -> ProtocolReport:
    """Run ``protocol(paulis, rho, rng)`` ``ceil(5 ln|A|)`` times (at least once) and take per-P medians."""
    start = time.perf_counter()
    paulis = _as_set(paulis)
    rng, seed = _resolve_rng(rng)
    reps = repetitions or max(1, math.ceil(budgets.oblivious_const * math.log(len(paulis))))
    runs = [protocol(paulis, rho, rng) for _ in range(reps)]
    stacked = np.stack([r.estimates for r in runs])
    est = np.array([median_amplify(col) for col in stacked.T])
    return ProtocolReport(f"oblivious[{runs[0].protocol}]", paulis.labels(), est, runs[0].targets,
                          sum(r.rounds for r in runs), sum(r.copies for r in runs), seed,
                          time.perf_counter() - start, extra={"repetitions": reps})
