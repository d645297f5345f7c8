"""Runtime limits for dense linear algebra.

Several operations (window reductions, disentangling unitaries, parent
Hamiltonian projectors, oracle diagonalization) materialize dense objects
whose size is exponential in the number of involved sites.  A single global
limit caps the dimension of any such object; it can be set programmatically
or through the ``MPSTOMO_DENSE_LIMIT`` environment variable.
"""

from __future__ import annotations

import os

_DEFAULT_DENSE_LIMIT = 4096  # 2**12 amplitudes

_override: int | None = None


def dense_limit() -> int:
    """Maximum dense vector length (d**w) allowed for window-sized objects."""
    if _override is not None:
        return _override
    return int(os.environ.get("MPSTOMO_DENSE_LIMIT", _DEFAULT_DENSE_LIMIT))


def set_dense_limit(value: int | None) -> None:
    """Override the dense limit for this process (``None`` restores default)."""
    global _override
    if value is not None and value < 2:
        raise ValueError("dense limit must be at least 2")
    _override = value


def check_dense(dim: int, what: str) -> None:
    limit = dense_limit()
    if dim > limit:
        raise ValueError(
            f"{what} requires a dense object of dimension {dim}, "
            f"exceeding the configured limit {limit} "
            "(see mpstomo.config.set_dense_limit / MPSTOMO_DENSE_LIMIT)"
        )
