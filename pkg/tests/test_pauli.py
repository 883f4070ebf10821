import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliest import pauli as pl
from pauliest.pauli import PauliError, PauliSet, PauliString, parse_pauli

from . import oracles

labels_st = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def pair_st(max_n=4):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n)))


def test_single_qubit_index_order():
    assert [str(PauliString.from_index(1, a)) for a in range(4)] == ["I", "Z", "X", "Y"]


def test_two_qubit_index_interleaves_first_qubit_high():
    assert parse_pauli("XI").index == 8
    assert parse_pauli("IX").index == 2
    assert parse_pauli("ZY").index == 7


@pytest.mark.parametrize("bad", ["", "XQ", "xz", "X Y"])
def test_parse_rejects(bad):
    with pytest.raises(PauliError):
        parse_pauli(bad)


@given(labels_st)
def test_parse_format_roundtrip(label):
    p = parse_pauli(label)
    assert str(p) == label
    assert PauliString.from_index(p.n, p.index) == p
    assert p.weight == sum(ch != "I" for ch in label)
    assert p.num_y == label.count("Y")


@given(labels_st)
def test_to_dense_matches_kronecker(label):
    np.testing.assert_allclose(pl.to_dense(parse_pauli(label)), oracles.dense(label), atol=0)


@given(pair_st())
def test_commutes_matches_dense(pair):
    a, b = pair
    expected = 1 if oracles.commute(a, b) else -1
    assert pl.commutes(parse_pauli(a), parse_pauli(b)) == expected
    assert pl.commutes(parse_pauli(b), parse_pauli(a)) == expected


@given(pair_st())
def test_mul_phase_matches_dense(pair):
    a, b = pair
    phase, prod = pl.mul(parse_pauli(a), parse_pauli(b))
    np.testing.assert_allclose(phase * oracles.dense(str(prod)), oracles.dense(a) @ oracles.dense(b), atol=1e-12)


def test_mul_textbook_phases():
    assert pl.mul(parse_pauli("X"), parse_pauli("Y")) == (1j, parse_pauli("Z"))
    assert pl.mul(parse_pauli("Y"), parse_pauli("X")) == (-1j, parse_pauli("Z"))


@settings(max_examples=50)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(*[st.text("IXYZ", min_size=n, max_size=n)] * 3)))
def test_mul_associative(triple):
    a, b, c = (parse_pauli(s) for s in triple)
    p1, ab = pl.mul(a, b)
    p2, abc1 = pl.mul(ab, c)
    q1, bc = pl.mul(b, c)
    q2, abc2 = pl.mul(a, bc)
    assert abc1 == abc2 and np.isclose(p1 * p2, q1 * q2)


def test_embed_and_concat():
    p = parse_pauli("XY")
    assert str(pl.embed(p, [1, 3], 3)) == "XYIIXY"
    assert str(pl.embed(p, [2], 2)) == "IIXY"
    assert str(pl.concat(parse_pauli("Z"), p)) == "ZXY"
    with pytest.raises(PauliError):
        pl.embed(p, [4], 3)


def test_symplectic_inner_matches_commutation():
    for a in range(16):
        for b in range(16):
            pa, pb = PauliString.from_index(2, a), PauliString.from_index(2, b)
            assert (-1) ** pl.symplectic_inner(a, b) == pl.commutes(pa, pb)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pauli_expectations_match_traces(kernel_backend, n, rng):
    m = rng.standard_normal((2**n, 2**n)) + 1j * rng.standard_normal((2**n, 2**n))
    got = pl.pauli_expectations(m)
    for a in range(4**n):
        label = str(PauliString.from_index(n, a))
        assert np.isclose(got[a], np.trace(oracles.dense(label) @ m), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_from_pauli_coefficients_inverts(n, rng):
    rho = oracles.random_rho(n, rng)
    coeffs = np.real(pl.pauli_expectations(rho))
    np.testing.assert_allclose(pl.from_pauli_coefficients(coeffs, n) / 2**n, rho, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symplectic_walsh_brute_force(kernel_backend, n, rng):
    v = rng.standard_normal(4**n)
    got = pl.symplectic_walsh(v, n)
    for b in range(4**n):
        expected = sum(v[a] * (-1) ** pl.symplectic_inner(a, b) for a in range(4**n))
        assert np.isclose(got[b], expected)


def test_y_signs():
    assert list(pl.y_signs(1)) == [1, 1, 1, -1]


def test_conjugate_and_trace_with(rng):
    m = rng.standard_normal((4, 4))
    p = parse_pauli("XZ")
    np.testing.assert_allclose(pl.conjugate(p, m), oracles.dense("XZ") @ m @ oracles.dense("XZ"))
    np.testing.assert_allclose(pl.apply_left(p, m), oracles.dense("XZ") @ m)
    assert np.isclose(pl.trace_with(p, m), np.trace(oracles.dense("XZ") @ m))


def test_pauli_set_text_format(tmp_path):
    text = "# header\nXX\n\n  ZZ  # trailing\nYI\n"
    path = tmp_path / "a.txt"
    path.write_text(text)
    s = PauliSet.from_file(path)
    assert s.labels() == ["XX", "ZZ", "YI"]
    assert PauliSet.from_text(s.to_text()).labels() == s.labels()
    assert s.position(parse_pauli("ZZ")) == 1
    assert parse_pauli("YI") in s


@pytest.mark.parametrize("text", ["XX\nXX\n", "XX\nZ\n", "XQ\n"])
def test_pauli_set_rejects(text):
    with pytest.raises(PauliError):
        PauliSet.from_text(text)


def test_pauli_set_all():
    s = PauliSet.all(2)
    assert len(s) == 16 and list(s.indices) == list(range(16))
