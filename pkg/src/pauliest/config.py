"""Process-wide settings."""
from __future__ import annotations

import os

DEFAULT_DENSE_CAP = 7


def dense_cap() -> int:
    """Largest qubit count for which dense 2^n x 2^n matrices are built.

    Overridable through the ``PAULIEST_DENSE_CAP`` environment variable.
    """
    raw = os.environ.get("PAULIEST_DENSE_CAP")
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"PAULIEST_DENSE_CAP must be an integer, got {raw!r}") from exc


class DenseCapError(ValueError):
    """Raised when a dense operation would exceed the configured qubit cap."""


def check_cap(n: int, what: str = "dense operation") -> None:
    cap = dense_cap()
    if n > cap:
        raise DenseCapError(f"{what} on {n} qubits exceeds dense cap of {cap}")
