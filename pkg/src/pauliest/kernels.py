"""Backend selection for the hot loops.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy versions in ``_pykernels`` take over.  Setting ``PAULIEST_PURE_PYTHON=1``
forces the fallback.
"""
from __future__ import annotations

import contextlib
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = "python" if (_ckernels is None or os.environ.get("PAULIEST_PURE_PYTHON")) else "cython"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (returns a new array).

    ``out[..., j] = sum_i (-1)^popcount(i & j) values[..., i]``.
    """
    values = np.asarray(values)
    dtype = np.complex128 if np.iscomplexobj(values) else np.float64
    shape = values.shape
    data = np.array(values, dtype=dtype, order="C").reshape(-1, shape[-1])
    _BACKENDS[_active].fwht_inplace(data)
    return data.reshape(shape)


def commutation_signs(xa, za, xb, zb) -> np.ndarray:
    """``out[i, j] = (-1)^{symplectic(a_i, b_j)}`` as int8, masks as uint64 arrays."""
    arrays = [np.ascontiguousarray(m, dtype=np.uint64) for m in (xa, za, xb, zb)]
    return _BACKENDS[_active].commutation_signs(*arrays)
