"""Exact-simulation toolkit for Pauli shadow tomography and purity testing."""

__version__ = "0.1.0"

from .kernels import backend, use_backend  # noqa: E402
from .pauli import PauliSet, PauliString, parse_pauli  # noqa: E402
from .quantum import DensityMatrix, Povm, PureState, make_rng, state_from_spec  # noqa: E402

__all__ = [
    "__version__", "backend", "use_backend", "PauliSet", "PauliString", "parse_pauli",
    "DensityMatrix", "Povm", "PureState", "make_rng", "state_from_spec",
]
