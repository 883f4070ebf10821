import numpy as np
import pytest
from scipy.linalg import hadamard

from pauliest import kernels


@pytest.mark.parametrize("n", [0, 1, 3, 6])
def test_fwht_matches_hadamard_matrix(kernel_backend, n, rng):
    v = rng.standard_normal(2**n)
    np.testing.assert_allclose(kernels.fwht(v), hadamard(2**n) @ v, atol=1e-12)


def test_fwht_complex_and_batched(kernel_backend, rng):
    v = rng.standard_normal((3, 16)) + 1j * rng.standard_normal((3, 16))
    np.testing.assert_allclose(kernels.fwht(v), v @ hadamard(16).T, atol=1e-12)


def test_fwht_is_an_involution_up_to_scale(kernel_backend, rng):
    v = rng.standard_normal(64)
    np.testing.assert_allclose(kernels.fwht(kernels.fwht(v)) / 64, v, atol=1e-12)


def test_fwht_does_not_mutate_input(kernel_backend):
    v = np.arange(8.0)
    kernels.fwht(v)
    np.testing.assert_array_equal(v, np.arange(8.0))


def test_commutation_signs_brute_force(kernel_backend, rng):
    xa, za, xb, zb = (rng.integers(0, 2**5, size=s, dtype=np.uint64) for s in (7, 7, 9, 9))
    out = kernels.commutation_signs(xa, za, xb, zb)
    assert out.dtype == np.int8 and out.shape == (7, 9)
    for i in range(7):
        for j in range(9):
            parity = bin((int(xa[i]) & int(zb[j])) ^ (int(za[i]) & int(xb[j]))).count("1") & 1
            assert out[i, j] == (-1) ** parity


def test_backends_agree(rng):
    v = rng.standard_normal((4, 32))
    masks = [rng.integers(0, 2**20, size=50, dtype=np.uint64) for _ in range(4)]
    results = []
    for name in kernels.available_backends():
        with kernels.use_backend(name):
            results.append((kernels.fwht(v), kernels.commutation_signs(*masks)))
    for f, c in results[1:]:
        np.testing.assert_allclose(f, results[0][0], atol=1e-12)
        np.testing.assert_array_equal(c, results[0][1])


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_use_backend_restores_previous():
    before = kernels.backend()
    with kernels.use_backend("python"):
        assert kernels.backend() == "python"
    assert kernels.backend() == before
