"""Shared brute-force oracles, written independently of the library paths
they are used to check."""

from __future__ import annotations

import numpy as np
import pytest

_P1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_chain(ops) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def embed_word(word: str, start: int, num_sites: int) -> np.ndarray:
    """Dense matrix of a Pauli word embedded at ``start`` in an N-site chain."""
    ops = [_P1["I"]] * num_sites
    for j, c in enumerate(word):
        ops[start + j] = _P1[c]
    return kron_chain(ops)


def dense_partial_trace(rho: np.ndarray, num_sites: int, start: int, length: int,
                        d: int = 2) -> np.ndarray:
    """Partial trace onto sites [start, start+length), loop-based."""
    left = d ** start
    mid = d ** length
    right = d ** (num_sites - start - length)
    r = rho.reshape(left, mid, right, left, mid, right)
    out = np.zeros((mid, mid), dtype=complex)
    for a in range(left):
        for b in range(right):
            out += r[a, :, b, a, :, b]
    return out


def dense_rho(vec: np.ndarray) -> np.ndarray:
    return np.outer(vec, vec.conj())


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
