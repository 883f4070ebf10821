import json
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliest import quantum as qm
from pauliest.pauli import PauliString, parse_pauli
from pauliest.quantum import DensityMatrix, Povm, PovmError, StateError

from . import oracles


def purity_event_oracle(rho: np.ndarray, k: int) -> float:
    """Measure the leading n-k qubits of both copies, then swap-test the rest."""
    n = int(np.log2(rho.shape[0]))
    m = n - k
    dm, dk = 2**m, 2**k
    op = np.zeros((4**n, 4**n))
    for idx in range(4**n):
        a1, b1, a2, b2 = idx // (dk * dm * dk), (idx // (dm * dk)) % dk, (idx // dk) % dm, idx % dk
        if a1 != a2:
            continue
        # (I - SWAP_B)/2 restricted to matching a-outcomes
        op[idx, idx] += 0.5
        op[(a1 * dk + b2) * dm * dk + a2 * dk + b1, idx] -= 0.5
    return float(np.real(np.trace(op @ np.kron(rho, rho))))


def test_make_rng_is_deterministic_and_stream_separated():
    a = qm.make_rng(5, 0).random(4)
    assert np.array_equal(a, qm.make_rng(5, 0).random(4))
    assert not np.array_equal(a, qm.make_rng(5, 1).random(4))


def test_density_matrix_validation():
    with pytest.raises(StateError):
        DensityMatrix(np.eye(2))
    with pytest.raises(StateError):
        DensityMatrix(np.array([[0.5, 0.5j], [0.5j, 0.5]]))
    with pytest.raises(StateError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(StateError):
        DensityMatrix(np.eye(3) / 3)


def test_density_json_roundtrip(rng):
    rho = qm.random_density(2, rng)
    data = json.loads(json.dumps(rho.to_json()))
    assert data["n"] == 2 and len(data["entries"]) == 16
    assert data["entries"][1] == [rho.matrix[0, 1].real, rho.matrix[0, 1].imag]
    np.testing.assert_array_equal(DensityMatrix.from_json(data).matrix, rho.matrix)


def test_rho_p_and_identity_warning():
    rho = qm.rho_p(parse_pauli("XZ"), 0.2)
    assert np.isclose(qm.expectation(parse_pauli("XZ"), rho), 0.6)
    with pytest.raises(StateError):
        qm.rho_p(parse_pauli("X"), 0.4)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        bad = qm.rho_p(PauliString.identity(1), 0.1)
    assert caught and "identity" in bad.flags


def test_named_states(rng):
    assert np.isclose(qm.state_from_spec("mixed", 3, rng).purity(), 1 / 8)
    assert np.isclose(qm.state_from_spec("haar", 2, rng).purity(), 1)
    ghz = qm.state_from_spec("ghz", 3, rng)
    assert np.isclose(qm.expectation(parse_pauli("XXX"), ghz), 1)
    prod = qm.state_from_spec("product:01", None, rng)
    assert np.isclose(qm.expectation(parse_pauli("ZZ"), prod), -1)
    assert np.isclose(qm.expectation(parse_pauli("ZI"), prod), 1)
    rp = qm.state_from_spec("rho_p:YY:0.1", None, rng)
    assert np.isclose(qm.expectation(parse_pauli("YY"), rp), 0.3)
    with pytest.raises(StateError):
        qm.state_from_spec("haar", None, rng)
    with pytest.raises(StateError):
        qm.state_from_spec("bogus", 2, rng)


def test_state_from_json_file(tmp_path, rng):
    rho = qm.random_density(1, rng)
    path = tmp_path / "rho.json"
    path.write_text(json.dumps(rho.to_json()))
    np.testing.assert_allclose(qm.state_from_spec(str(path), None, rng).matrix, rho.matrix)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_spectrum_matches_traces(n, rng):
    rho = qm.random_density(n, rng)
    spec = qm.pauli_spectrum(rho)
    for a in range(4**n):
        assert np.isclose(spec[a], oracles.expectation(str(PauliString.from_index(n, a)), rho.matrix))


def test_sum_of_squared_pure_spectrum_is_dimension(rng):
    psi = qm.haar_random_pure(3, rng)
    assert np.isclose(np.sum(qm.pure_pauli_spectrum(psi) ** 2), 8)


def test_povm_validation():
    with pytest.raises(PovmError):
        Povm([np.eye(2) / 3, np.eye(2) / 3])
    with pytest.raises(PovmError):
        Povm([np.diag([2.0, 0.0]), np.diag([-1.0, 1.0])])
    comp = qm.computational_povm(2)
    assert len(comp) == 4


def test_outcome_distribution_and_sampling(rng):
    rho = qm.product_state("10").density()
    dist = qm.outcome_distribution(qm.computational_povm(2), rho)
    np.testing.assert_allclose(dist.probabilities, [0, 0, 1, 0])
    assert set(qm.sample(qm.computational_povm(2), rho, rng, 20)) == {dist.labels[2]}


def test_normalize_probabilities():
    np.testing.assert_allclose(qm.normalize_probabilities(np.array([0.5, 0.5 + 1e-12, -1e-12])),
                               [0.5, 0.5, 0.0], atol=1e-11)
    with pytest.raises(ValueError):
        qm.normalize_probabilities(np.array([1.1, -0.1]))


@pytest.mark.parametrize("n", [1, 2])
def test_bell_eigenvalue_closed_form(n):
    for p in oracles.labels(n):
        pp = np.kron(oracles.dense(p), oracles.dense(p))
        for q in oracles.labels(n):
            v = oracles.bell_vector(q)
            expected = np.real(v.conj() @ pp @ v)
            assert qm.bell_eigenvalue(parse_pauli(p), parse_pauli(q)) == round(expected)


def test_bell_eigenvalue_table_matches_scalar():
    table = qm.bell_eigenvalue_table(2)
    for a in range(16):
        for b in range(16):
            assert table[a, b] == qm.bell_eigenvalue(PauliString.from_index(2, a), PauliString.from_index(2, b))


@pytest.mark.parametrize("n", [1, 2])
def test_bell_distribution_matches_dense(n, rng):
    s, r = oracles.random_rho(n, rng), oracles.random_rho(n, rng)
    got = qm.bell_distribution(DensityMatrix(s), DensityMatrix(r))
    for b, q in enumerate(str(PauliString.from_index(n, b)) for b in range(4**n)):
        v = oracles.bell_vector(q)
        assert np.isclose(got[b], np.real(v.conj() @ np.kron(s, r) @ v), atol=1e-12)


def test_bell_povm_is_valid():
    assert len(qm.bell_povm(2)) == 16


def test_conjugated_distribution_matches_povm(rng):
    psi = qm.haar_random_pure(2, rng)
    rho = qm.random_density(2, rng)
    povm = Povm([oracles.dense(q) @ psi.density().matrix @ oracles.dense(q) / 4 for q in
                 (str(PauliString.from_index(2, a)) for a in range(16))])
    np.testing.assert_allclose(qm.conjugated_distribution(psi, rho),
                               qm.outcome_distribution(povm, rho).probabilities, atol=1e-12)
    # the transposed variant is what pauli_conjugated_povm builds
    np.testing.assert_allclose(qm.outcome_distribution(qm.pauli_conjugated_povm(psi), rho).probabilities,
                               qm.bell_distribution(psi.density(), rho), atol=1e-12)


def test_chi2():
    assert qm.chi2_from_probabilities(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0
    assert np.isclose(qm.chi2_from_probabilities(np.array([1.0, 0.0]), np.array([0.5, 0.5])), 1.0)
    povm = qm.computational_povm(1)
    assert np.isclose(qm.chi2_divergence(povm, qm.rho_p(parse_pauli("Z"), 0.1), qm.maximally_mixed(1)), 0.09)


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 5) for k in range(n + 1)])
def test_purity_event_on_mixed_is_exact_rational(n, k):
    d = 2**n
    mat = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(d):
            mat[i, j] = Fraction(1, d) if i == j else Fraction(0)
    assert qm.purity_event_probability(mat, k) == Fraction(2**k - 1, 2 ** (n + 1))


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (2, 2)])
def test_purity_event_matches_dense_oracle(n, k, rng):
    rho = oracles.random_rho(n, rng)
    assert np.isclose(qm.purity_event_probability(rho, k), purity_event_oracle(rho, k), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.data())
def test_purity_event_vanishes_on_pure_states(n, data):
    k = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2**32 - 1))
    psi = qm.haar_random_pure(n, np.random.default_rng(seed))
    assert abs(qm.purity_event_probability(psi.density(), k)) <= 1e-12


def test_partial_trace(rng):
    a, b = oracles.random_rho(1, rng), oracles.random_rho(2, rng)
    joint = DensityMatrix(np.kron(a, b))
    np.testing.assert_allclose(qm.partial_trace(joint, [1, 2]).matrix, a, atol=1e-12)
    np.testing.assert_allclose(qm.partial_trace(joint, [0]).matrix, b, atol=1e-12)
    assert qm.partial_trace(joint, [0, 1, 2]).n == 0
