"""Window-local Pauli-product bases and operator sums.

Operators of "local Hamiltonian" form -- sums of Pauli words supported on
sliding windows of ``w`` adjacent qubits -- are represented by a real
coefficient array of shape ``(N - w + 1, 4**w)``.  The stored coefficient of
word ``m`` on window ``i`` is exactly ``tr[sigma_i P_m]`` when the operator
encodes measured reductions; no global 2**N or 2**w prefactor is applied.
Labels are ASCII words over {I, X, Y, Z} in lexicographic order with the
identity word first.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from . import config
from .mps import GAUGE_LEFT_CANONICAL, MPS, canonicalize_left, window_reduced_densities

PAULI_CHARS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Stacked single-site Paulis, index order (m, row, col).
_PAULI_STACK = np.stack([PAULI_MATRICES[c] for c in PAULI_CHARS])
# Transposed stack used for traces: _PAULI_TR[m, s, t] = P_m[t, s].
_PAULI_TR = _PAULI_STACK.transpose(0, 2, 1).copy()


@lru_cache(maxsize=None)
def enumerate_window_basis(window_size: int) -> tuple[str, ...]:
    """All 4**w Pauli words of length w, lexicographic, identity first."""
    if window_size < 1:
        raise ValueError("window size must be at least 1")
    return tuple("".join(p) for p in product(PAULI_CHARS, repeat=window_size))


@lru_cache(maxsize=None)
def _label_indices(window_size: int) -> dict[str, int]:
    return {w: i for i, w in enumerate(enumerate_window_basis(window_size))}


def label_index(word: str) -> int:
    """Position of a Pauli word in the lexicographic window basis."""
    return _label_indices(len(word))[word]


def pauli_word_matrix(word: str) -> np.ndarray:
    """Dense matrix of a Pauli word (Kronecker product, site 0 leftmost)."""
    out = np.ones((1, 1), dtype=complex)
    for c in word:
        out = np.kron(out, PAULI_MATRICES[c])
    return out


def _interleave_pairs(mats: np.ndarray, w: int) -> np.ndarray:
    """(B, 2**w, 2**w) -> (B, s1, t1, s2, t2, ...) with row/col site pairs adjacent."""
    a = mats.reshape(-1, *([2] * (2 * w)))
    order = [0] + [ax for j in range(w) for ax in (1 + j, 1 + w + j)]
    return a.transpose(order)


def pauli_coefficients(mats: np.ndarray, window_size: int) -> np.ndarray:
    """tr[A P_m] for every window word m, for a batch of matrices.

    ``mats`` has shape ``(..., 2**w, 2**w)``; the result has shape
    ``(..., 4**w)`` with words ordered as in :func:`enumerate_window_basis`.
    """
    w = window_size
    dim = 2 ** w
    mats = np.asarray(mats, dtype=complex)
    batch = mats.shape[:-2]
    if mats.shape[-2:] != (dim, dim):
        raise ValueError(f"matrices must be {dim} x {dim} for window size {w}")
    nb = int(np.prod(batch)) if batch else 1
    a = _interleave_pairs(mats, w)
    # Contract one (row, col) site pair at a time; word indices accumulate at
    # the end with the first site most significant, matching the label order.
    for _ in range(w):
        a = np.einsum("mst,xst...->x...m", _PAULI_TR, a.reshape(nb, 2, 2, -1))
    return a.reshape(*batch, 4 ** w)


def operator_from_coefficients(coeffs: np.ndarray, window_size: int) -> np.ndarray:
    """Dense window operator sum_m c_m P_m (no normalization factor)."""
    w = window_size
    coeffs = np.asarray(coeffs)
    batch = coeffs.shape[:-1]
    if coeffs.shape[-1] != 4 ** w:
        raise ValueError(f"expected {4 ** w} coefficients, got {coeffs.shape[-1]}")
    nb = int(np.prod(batch)) if batch else 1
    a = coeffs.reshape(nb, -1).astype(complex)
    for _ in range(w):
        a = np.einsum("mst,xm...->x...st", _PAULI_STACK, a.reshape(nb, 4, -1))
    # axes now (batch, s1, t1, ..., sw, tw); separate rows from columns
    a = a.reshape(nb, *([2] * (2 * w)))
    perm = [0] + [1 + 2 * j for j in range(w)] + [2 + 2 * j for j in range(w)]
    a = a.transpose(perm).reshape(nb, 2 ** w, 2 ** w)
    return a.reshape(*batch, 2 ** w, 2 ** w) if batch else a[0]


def density_from_coefficients(coeffs: np.ndarray, window_size: int) -> np.ndarray:
    """Reassemble sigma = 2**-w sum_m tr[sigma P_m] P_m."""
    return operator_from_coefficients(coeffs, window_size) / 2 ** window_size


def expand_density(dm) -> np.ndarray:
    """Pauli coefficients tr[sigma P_m] of a window density matrix.

    Accepts a :class:`~mpstomo.mps.DensityMatrix` or a plain Hermitian
    ndarray.  Coefficients of a Hermitian input are real; the imaginary
    remainder must stay below 1e-10.
    """
    mat = dm.matrix if hasattr(dm, "matrix") else np.asarray(dm, dtype=complex)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
        raise ValueError("window matrix is not Hermitian within tolerance")
    w = int(round(np.log2(mat.shape[0])))
    c = pauli_coefficients(mat, w)
    if np.max(np.abs(c.imag)) > 1e-10:
        raise ValueError("Pauli coefficients have a non-real part beyond tolerance")
    return c.real


class WindowOperatorSum:
    """Real-coefficient operator sum over sliding Pauli windows.

    The represented operator is ``sum_{i,m} coeffs[i, m] P_m^(i)`` where
    ``P_m^(i)`` acts as word m on sites ``i .. i+w-1`` and trivially
    elsewhere.  Window-local structure is closed under addition and scaling,
    which is what keeps the reconstruction loop efficient.
    """

    def __init__(self, num_sites: int, window_size: int, coeffs=None):
        if window_size < 1 or window_size > num_sites:
            raise ValueError("window size must lie within the chain")
        self.num_sites = int(num_sites)
        self.window_size = int(window_size)
        nw = self.num_windows
        if coeffs is None:
            self.coeffs = np.zeros((nw, 4 ** window_size))
        else:
            arr = np.asarray(coeffs, dtype=float)
            if arr.shape != (nw, 4 ** window_size):
                raise ValueError(
                    f"coefficients must have shape {(nw, 4 ** window_size)}, got {arr.shape}"
                )
            self.coeffs = arr.copy()

    @property
    def num_windows(self) -> int:
        return self.num_sites - self.window_size + 1

    def copy(self) -> "WindowOperatorSum":
        return WindowOperatorSum(self.num_sites, self.window_size, self.coeffs)

    def set(self, window: int, word: str, value: float) -> None:
        self.coeffs[window, label_index(word)] = value

    def get(self, window: int, word: str) -> float:
        return float(self.coeffs[window, label_index(word)])

    def window_matrices(self) -> np.ndarray:
        """Dense per-window operators, shape (num_windows, 2**w, 2**w)."""
        return operator_from_coefficients(self.coeffs, self.window_size)

    def _check_compatible(self, other: "WindowOperatorSum") -> None:
        if (self.num_sites, self.window_size) != (other.num_sites, other.window_size):
            raise ValueError("operator sums have mismatched chain or window size")

    def __add__(self, other: "WindowOperatorSum") -> "WindowOperatorSum":
        self._check_compatible(other)
        return WindowOperatorSum(self.num_sites, self.window_size, self.coeffs + other.coeffs)

    def __sub__(self, other: "WindowOperatorSum") -> "WindowOperatorSum":
        self._check_compatible(other)
        return WindowOperatorSum(self.num_sites, self.window_size, self.coeffs - other.coeffs)

    def __mul__(self, factor: float) -> "WindowOperatorSum":
        return WindowOperatorSum(self.num_sites, self.window_size, self.coeffs * float(factor))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __repr__(self) -> str:
        return (
            f"WindowOperatorSum(N={self.num_sites}, w={self.window_size}, "
            f"nonzero={int(np.count_nonzero(self.coeffs))})"
        )


def expectations(mps: MPS, window_size: int) -> np.ndarray:
    """tr[|psi><psi| P_m^(i)] for every window i and word m.

    Shape ``(N - w + 1, 4**w)``, word order as in
    :func:`enumerate_window_basis`.  Computed window by window from the
    reduced densities, linear cost in the chain length.
    """
    rdms = window_reduced_densities(mps, window_size)
    return pauli_coefficients(rdms, window_size).real


def opsum_expectation(mps: MPS, opsum: WindowOperatorSum) -> float:
    """<psi| opsum |psi> from window expectations."""
    if mps.num_sites != opsum.num_sites:
        raise ValueError("chain length mismatch")
    vals = expectations(mps, opsum.window_size)
    return float(np.sum(opsum.coeffs * vals))


def pauli_expectation(mps: MPS, start: int, word: str) -> float:
    """<psi| P |psi> for a single Pauli word anchored at site ``start``.

    Contracts the transfer network directly, so the word may span up to the
    whole chain regardless of the dense limit.
    """
    n = mps.num_sites
    if start < 0 or start + len(word) > n:
        raise ValueError("word extends outside the chain")
    if any(p != 2 for p in mps.phys_dims):
        raise ValueError("Pauli words are defined for qubit chains only")
    m = mps if mps.gauge == GAUGE_LEFT_CANONICAL else canonicalize_left(mps)
    env = np.ones((1, 1), dtype=complex)
    for i, t in enumerate(m.tensors):
        if start <= i < start + len(word):
            op = PAULI_MATRICES[word[i - start]]
            env = np.einsum("xy,xpa,ps,ysb->ab", env, t.conj(), op, t)
        else:
            env = np.einsum("xy,xsa,ysb->ab", env, t.conj(), t)
    return float(env[0, 0].real)


def apply_opsum_dense(opsum: WindowOperatorSum) -> np.ndarray:
    """Dense 2**N x 2**N matrix of an operator sum (oracle support)."""
    n = opsum.num_sites
    dim = 2 ** n
    config.check_dense(dim, "dense operator assembly")
    out = np.zeros((dim, dim), dtype=complex)
    mats = opsum.window_matrices()
    w = opsum.window_size
    for i in range(opsum.num_windows):
        left = np.eye(2 ** i, dtype=complex)
        right = np.eye(2 ** (n - i - w), dtype=complex)
        out += np.kron(np.kron(left, mats[i]), right)
    return out


def apply_opsum_to_vector(opsum: WindowOperatorSum, vec: np.ndarray) -> np.ndarray:
    """Apply an operator sum to a dense state vector without forming the matrix."""
    n = opsum.num_sites
    w = opsum.window_size
    dim = 2 ** n
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (dim,):
        raise ValueError(f"vector must have length {dim}")
    mats = opsum.window_matrices()
    out = np.zeros(dim, dtype=complex)
    for i in range(opsum.num_windows):
        v = vec.reshape(2 ** i, 2 ** w, 2 ** (n - i - w))
        out += np.einsum("ab,xbz->xaz", mats[i], v).reshape(dim)
    return out
