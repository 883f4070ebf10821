# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Walsh-Hadamard transforms and Pauli commutation signs."""
import numpy as np
cimport numpy as cnp

ctypedef fused scalar_t:
    double
    double complex


cdef void _fwht_row(scalar_t* row, Py_ssize_t length) noexcept nogil:
    cdef Py_ssize_t h = 1, i, j
    cdef scalar_t u, v
    while h < length:
        i = 0
        while i < length:
            for j in range(i, i + h):
                u = row[j]
                v = row[j + h]
                row[j] = u + v
                row[j + h] = u - v
            i += 2 * h
        h *= 2


def fwht_inplace(scalar_t[:, ::1] data):
    """Unnormalized Walsh-Hadamard transform of every row, in place."""
    cdef Py_ssize_t rows = data.shape[0], length = data.shape[1], r
    if length & (length - 1):
        raise ValueError("row length must be a power of two")
    with nogil:
        for r in range(rows):
            _fwht_row(&data[r, 0], length)


cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil


cdef inline int _parity(unsigned long long v) noexcept nogil:
    return __builtin_parityll(v)


def commutation_signs(
    const unsigned long long[::1] xa,
    const unsigned long long[::1] za,
    const unsigned long long[::1] xb,
    const unsigned long long[::1] zb,
):
    """Matrix of (-1)^<a_i, b_j> for packed single-word Pauli masks."""
    cdef Py_ssize_t na = xa.shape[0], nb = xb.shape[0], i, j
    out = np.empty((na, nb), dtype=np.int8)
    cdef signed char[:, ::1] res = out
    cdef unsigned long long ax, az
    with nogil:
        for i in range(na):
            ax = xa[i]
            az = za[i]
            for j in range(nb):
                res[i, j] = 1 - 2 * _parity((ax & zb[j]) ^ (az & xb[j]))
    return out
