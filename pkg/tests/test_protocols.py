import math

import numpy as np
import pytest

from pauliest import pauli as pl
from pauliest import protocols as pr
from pauliest.coloring import build_graph, fractional_coloring, schedule
from pauliest.pauli import PauliSet, PauliString
from pauliest.quantum import (bell_distribution, bell_eigenvalue_table, bell_povm, ghz, haar_random_pure,
                              make_rng, maximally_mixed, pauli_spectrum, random_density)
from pauliest.stabilizer import clifford_povm, eigenbasis, eigenstate, stabilizer_covering

from . import oracles


def dense_kmem_distribution(rho: np.ndarray, k: int, group) -> np.ndarray:
    """Bell measurement on the first k qubits of both copies, eigenbasis of ``group`` on the rest."""
    n = int(np.log2(rho.shape[0]))
    m = n - k
    bells = [oracles.bell_vector(str(PauliString.from_index(k, v))) for v in range(4**k)] if k else [np.ones(1)]
    projs = eigenbasis(group).projectors if m else np.ones((1, 1, 1))
    big = np.kron(rho, rho)
    order = list(range(k)) + list(range(2 * k, 2 * k + m)) + list(range(k, 2 * k)) + list(range(2 * k + m, 2 * n))
    perm = order + [2 * n + o for o in order]
    out = np.zeros((4**k, len(projs), len(projs)))
    for v, b in enumerate(bells):
        for e, pe in enumerate(projs):
            for f, pf in enumerate(projs):
                op = np.kron(np.kron(np.outer(b, b.conj()), pe), pf)
                # op acts on (A1 A2 B1 B2); rearrange to (A1 B1 A2 B2)
                t = op.reshape([2] * (4 * n)).transpose(perm).reshape(4**n, 4**n)
                out[v, e, f] = np.real(np.trace(t @ big))
    return out


def test_round_budgets_frozen():
    # natural-log budgets evaluated by hand
    assert pr.bell_rounds(64, 0.25) == math.ceil(8 * math.log(30 * 64) / 0.25**4) == 15484
    assert pr.kmem_rounds(4, 2, 0.3) == 175282
    assert pr.sign_rounds(64, 0.25) == math.ceil(2 * math.log(20 * 64) / 0.25**4)
    assert pr.nomem_rounds(9, 0.2, 0.5) == math.ceil(16 * math.log(270) / (0.04 * 0.5))
    assert pr.clifford_rounds(9, 0.2, 3) == math.ceil(16 * math.log(270) * 3 / 0.04)


def test_budget_overrides():
    b = pr.Budgets.from_dict({"bell_const": 1.0})
    assert pr.bell_rounds(64, 0.25, b) == math.ceil(math.log(30 * 64) / 0.25**4)
    with pytest.raises(pr.ProtocolError):
        pr.Budgets.from_dict({"nonsense": 1})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bell_estimator_is_unbiased_for_squares(n, rng):
    rho = random_density(n, rng)
    lam = pauli_spectrum(rho)
    p = bell_distribution(rho, rho)
    # E_Q mu(P, Q) = tr(P rho)^2
    np.testing.assert_allclose(bell_eigenvalue_table(n) @ p, lam**2, atol=1e-12)


@pytest.mark.parametrize("n,k", [(2, 1), (2, 0), (2, 2), (3, 1), (3, 2)])
def test_kmem_distribution_matches_dense_oracle(n, k, rng):
    rho = random_density(n, rng)
    lam = pauli_spectrum(rho)
    for group in stabilizer_covering(n - k).groups:
        p = pr.kmem_outcome_distribution(lam, k, group)
        np.testing.assert_allclose(p, dense_kmem_distribution(rho.matrix, k, group), atol=1e-10)
        # exact expectation of the square estimator
        est = pr.kmem_square_estimates(p, k, group)
        full = np.arange(4**k)[:, None] * 4 ** (n - k) + group.elements[None, :]
        np.testing.assert_allclose(est, lam[full] ** 2, atol=1e-12)


def test_kmem_protocol_report():
    rho = haar_random_pure(4, make_rng(7)).density()
    rep = pr.k_memory_protocol(rho, 2, 0.3, rounds_per_group=2000, rng=1)
    assert rep.extra["groups"] == 5
    assert rep.copies == 2 * 2000 * 5 + rep.extra["sign_copies"]
    assert len(rep.estimates) == 256


def test_bell_protocol_copies_and_determinism():
    rho = haar_random_pure(2, make_rng(3)).density()
    a = pr.bell_abs_protocol(PauliSet.all(2), rho, T=500, rng=9)
    b = pr.bell_abs_protocol(PauliSet.all(2), rho, T=500, rng=9)
    assert a.copies == 1000 and np.array_equal(a.estimates, b.estimates)
    assert np.all(a.estimates >= 0)
    assert a.estimates[0] == 1.0


def test_sign_recovery_zero_branch_and_accuracy():
    rho = haar_random_pure(3, make_rng(11)).density()
    A = PauliSet.all(3)
    f = np.abs(pauli_spectrum(rho))
    rep = pr.sign_recovery(A, f, rho, 0.25, rng=0)
    small = f < 0.5
    assert np.all(rep.estimates[small] == 0.0)
    assert rep.max_error() <= 0.75


def test_sign_recovery_search_mode_stabilizer_state():
    rho = ghz(2).density()
    A = PauliSet.all(2)
    f = np.abs(pauli_spectrum(rho))
    rep = pr.sign_recovery(A, f, rho, 0.2, rng=make_rng(4), sigma_mode="search")
    assert "sigma" not in rep.flags
    assert rep.max_error() <= 0.6


def test_two_copy_full_accounts_for_both_stages():
    rho = haar_random_pure(2, make_rng(5)).density()
    rep = pr.two_copy_full(PauliSet.all(2), rho, 0.5, rng=3)
    assert rep.copies == rep.extra["bell_copies"] + rep.extra["sign_copies"]
    assert rep.max_error() <= 0.5


def _two_family_union():
    fams = stabilizer_covering(2).groups[:2]
    A = PauliSet([PauliString.from_index(2, int(a)) for g in fams for a in g.elements if a])
    return fams, A


def test_no_memory_protocol():
    fams, A = _two_family_union()
    ens = pr.StateEnsemble.uniform([eigenstate(g) for g in fams])
    assert ens.delta(A) == pytest.approx(0.5)
    rho = random_density(2, make_rng(2))
    rep = pr.no_memory_protocol(A, ens, rho, eps=0.2, rng=0)
    assert rep.max_error() <= 0.2 and rep.rounds == pr.nomem_rounds(len(A), 0.2, 0.5)


def test_no_memory_flags_uninformative():
    ens = pr.StateEnsemble.uniform([eigenstate(stabilizer_covering(1).groups[2])])  # Z eigenstate
    rep = pr.no_memory_protocol(PauliSet.from_labels(["X", "Z"]), ens, maximally_mixed(1), T=50, rng=0)
    assert np.isnan(rep.estimates[0]) and "X" in rep.flags


def test_clifford_protocol():
    _, A = _two_family_union()
    plan = schedule(fractional_coloring(build_graph(A)))
    rho = random_density(2, make_rng(8))
    rep = pr.clifford_protocol(A, plan, rho, eps=0.2, rng=1)
    assert rep.max_error() <= 0.2 and not rep.flags


@pytest.mark.parametrize("c", [1, 2])
def test_generic_estimator(c):
    rho = haar_random_pure(1, make_rng(21)).density()
    A = PauliSet.from_labels(["X", "Y", "Z"])
    if c == 1:
        ens = pr.PovmEnsemble([clifford_povm(g) for g in stabilizer_covering(1).groups], np.full(3, 1 / 3))
    else:
        ens = pr.PovmEnsemble([bell_povm(1)], [1.0])
    rep = pr.generic_cm_estimator(A, ens, c, rho, 0.3, 40000, rng=5)
    assert rep.copies == c * 40000
    assert rep.max_error() <= 0.05
    if c == 2:
        assert all(S == [1, 2] for S in rep.extra["subsets"])


def test_moment_table_matches_formula():
    # Clifford POVM of the Z family: mu(Z, {1}) = 1 over 2^n normalization, mu(X, {1}) = 0
    ens = pr.PovmEnsemble([clifford_povm(stabilizer_covering(1).groups[2])], [1.0])
    mu, subsets = pr.moment_table(PauliSet.from_labels(["X", "Z"]), ens, 1)
    assert subsets == [(1,)]
    np.testing.assert_allclose(mu[:, 0], [0.0, 1.0], atol=1e-12)


def test_select_subsets_ties_go_to_earliest():
    subsets = pr._subsets(2)
    assert subsets == [(1,), (2,), (1, 2)]
    mu = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 100 / 0.01]])
    assert list(pr.select_subsets(mu, subsets, 0.3)) == [0, 2]


def test_purity_pure_states_never_flagged():
    psi = haar_random_pure(3, make_rng(0)).density()
    for s in range(20):
        assert pr.purity_test_k(psi, 1, rng=s).verdict == "pure"
        assert pr.purity_test_k(psi, 1, rng=s, mode="trajectory", repetitions=5).verdict == "pure"


def test_purity_repetitions_and_copies():
    v = pr.purity_test_k(maximally_mixed(4), 2, rng=0)
    assert v.repetitions == 40 and v.copies == 80
    assert v.event_probability == pytest.approx(3 / 32)


def test_purity_trajectory_frequency_matches_event_probability():
    rho = maximally_mixed(3)
    rng = make_rng(12)
    hits = sum(pr.purity_trajectory_event(rho, 2, rng) for _ in range(4000))
    p = 3 / 16
    assert abs(hits / 4000 - p) <= 4 * math.sqrt(p * (1 - p) / 4000)


def test_purity_rejects_bad_k():
    with pytest.raises(pr.ProtocolError):
        pr.purity_test_k(maximally_mixed(2), 3, rng=0)


def test_median_and_oblivious_wrapper():
    assert pr.median_amplify([3, 1, 2, 4]) == 2
    with pytest.raises(ValueError):
        pr.median_amplify([])
    rho = haar_random_pure(2, make_rng(1)).density()

    def proto(p, r, g):
        return pr.bell_abs_protocol(p, r, T=200, rng=g)

    rep = pr.oblivious_wrapper(proto, PauliSet.all(2), rho, rng=3)
    assert rep.extra["repetitions"] == math.ceil(5 * math.log(16))
    assert rep.rounds == 200 * rep.extra["repetitions"]


def test_report_json_handles_nan():
    rep = pr.ProtocolReport("x", ["X"], np.array([np.nan]), np.array([0.0]), 1, 1)
    assert rep.to_json()["estimates"] == [None]
    assert rep.max_error() == math.inf


def test_state_ensemble_validation():
    with pytest.raises(pr.ProtocolError):
        pr.StateEnsemble([ghz(2)], [0.5])
    with pytest.raises(pr.ProtocolError):
        pr.StateEnsemble([ghz(2), ghz(1)], [0.5, 0.5])


def test_symplectic_walsh_counts_give_bell_signs():
    # the Walsh trick must equal the explicit sum of mu over outcomes
    counts = np.arange(16, dtype=float)
    table = bell_eigenvalue_table(2)
    np.testing.assert_allclose(pl.y_signs(2) * pl.symplectic_walsh(counts, 2), table @ counts)
