"""Pure numpy implementations of the kernels in ``_ckernels``."""
import numpy as np


def fwht_inplace(data):
    """Unnormalized Walsh-Hadamard transform of every row of a 2-D array, in place."""
    rows, length = data.shape
    if length & (length - 1):
        raise ValueError("row length must be a power of two")
    h = 1
    while h < length:
        view = data.reshape(rows, length // (2 * h), 2, h)
        u = view[:, :, 0, :].copy()
        v = view[:, :, 1, :]
        view[:, :, 0, :] += v
        view[:, :, 1, :] = u - v
        h *= 2


def commutation_signs(xa, za, xb, zb):
    """Matrix of (-1)^<a_i, b_j> for packed single-word Pauli masks."""
    mixed = (xa[:, None] & zb[None, :]) ^ (za[:, None] & xb[None, :])
    return (1 - 2 * (np.bitwise_count(mixed) & 1)).astype(np.int8)
