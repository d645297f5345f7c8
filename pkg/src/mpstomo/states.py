"""Factory for benchmark states and Hamiltonians, plus the dense oracle.

All random draws use numpy's seedable PCG64 generator
(``numpy.random.default_rng``), so every construction is bit-reproducible
from its seed.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg

from . import config
from .mps import GAUGE_NONE, MPS, canonicalize_left
from .pauli import WindowOperatorSum, apply_opsum_dense, apply_opsum_to_vector, pauli_coefficients


def product_state(bits, d: int = 2) -> MPS:
    """Computational-basis product state |b_1 b_2 ...> as a bond-1 MPS."""
    tensors = []
    for b in bits:
        t = np.zeros((1, d, 1), dtype=complex)
        t[0, int(b), 0] = 1.0
        tensors.append(t)
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def w_state(num_sites: int) -> MPS:
    """Single-excitation state (|10...0> + ... + |0...01>)/sqrt(N), bond 2."""
    if num_sites < 2:
        raise ValueError("W state needs at least 2 sites")
    amp = 1.0 / np.sqrt(num_sites)
    first = np.zeros((1, 2, 2), dtype=complex)
    first[0, 0, 0] = 1.0       # no excitation yet
    first[0, 1, 1] = amp       # excite here
    mid = np.zeros((2, 2, 2), dtype=complex)
    mid[0, 0, 0] = 1.0
    mid[1, 0, 1] = 1.0
    mid[0, 1, 1] = amp
    last = np.zeros((2, 2, 1), dtype=complex)
    last[1, 0, 0] = 1.0        # excitation already placed
    last[0, 1, 0] = amp        # excite at the last site
    tensors = [first] + [mid.copy() for _ in range(num_sites - 2)] + [last]
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def ghz_state(num_sites: int, phase: float = 0.0) -> MPS:
    """(|0...0> + e^{i phase}|1...1>)/sqrt(2) as a bond-2 MPS."""
    if num_sites < 2:
        raise ValueError("GHZ state needs at least 2 sites")
    first = np.zeros((1, 2, 2), dtype=complex)
    first[0, 0, 0] = 1.0
    first[0, 1, 1] = 1.0
    mid = np.zeros((2, 2, 2), dtype=complex)
    mid[0, 0, 0] = 1.0
    mid[1, 1, 1] = 1.0
    last = np.zeros((2, 2, 1), dtype=complex)
    last[0, 0, 0] = 1.0 / np.sqrt(2)
    last[1, 1, 0] = np.exp(1j * phase) / np.sqrt(2)
    tensors = [first] + [mid.copy() for _ in range(num_sites - 2)] + [last]
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def cluster_state(num_sites: int) -> MPS:
    """Linear cluster state: |+>^N followed by CZ on every neighbouring pair.

    Amplitudes are 2**(-N/2) (-1)^(sum_i s_i s_{i+1}); the bond index carries
    the previous spin value, giving bond dimension 2.
    """
    if num_sites < 3:
        raise ValueError("cluster state needs at least 3 sites")
    isq = 1.0 / np.sqrt(2)
    first = np.zeros((1, 2, 2), dtype=complex)
    first[0, 0, 0] = isq
    first[0, 1, 1] = isq
    mid = np.zeros((2, 2, 2), dtype=complex)
    for prev in (0, 1):
        for s in (0, 1):
            mid[prev, s, s] = isq * (-1.0) ** (prev * s)
    last = np.zeros((2, 2, 1), dtype=complex)
    for prev in (0, 1):
        for s in (0, 1):
            last[prev, s, 0] = isq * (-1.0) ** (prev * s)
    tensors = [first] + [mid.copy() for _ in range(num_sites - 2)] + [last]
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def random_mps(num_sites: int, bond_dim: int, seed: int, d: int = 2) -> MPS:
    """Haar-ish random MPS: i.i.d. complex normal tensors, canonicalized."""
    rng = np.random.default_rng(seed)
    dims = [1]
    for i in range(1, num_sites):
        dims.append(min(bond_dim, d ** i, d ** (num_sites - i)))
    dims.append(1)
    tensors = []
    for i in range(num_sites):
        shape = (dims[i], d, dims[i + 1])
        tensors.append(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def ising_hamiltonian(num_sites: int) -> WindowOperatorSum:
    """Critical transverse-field Ising chain, open boundaries.

    H = -sum_{i<N} X_i X_{i+1} - sum_i Z_i, packed as a window-2 operator
    sum: every Z_i rides on the window starting at i, except the last one
    which rides on the final window.
    """
    if num_sites < 2:
        raise ValueError("need at least 2 sites")
    op = WindowOperatorSum(num_sites, 2)
    for i in range(num_sites - 1):
        op.set(i, "XX", -1.0)
        op.set(i, "ZI", -1.0)
    op.set(num_sites - 2, "IZ", op.get(num_sites - 2, "IZ") - 1.0)
    return op


def _random_hermitian_2x2(rng: np.random.Generator) -> np.ndarray:
    re = rng.uniform(-1.0, 1.0, size=(2, 2))
    im = rng.uniform(-1.0, 1.0, size=(2, 2))
    a = re + 1j * im
    return (a + a.conj().T) / 2


def random_nn_hamiltonian(num_sites: int, seed: int) -> WindowOperatorSum:
    """Random nearest-neighbour Hamiltonian H = sum_i r_i (x) r'_{i+1}.

    Both single-site factors of each bond term are independent Hermitian
    matrices whose entries have real and imaginary parts uniform on [-1, 1]
    before Hermitization (A + A^dag)/2.  Factors are drawn independently per
    bond, left factor first, so the construction is reproducible per seed.
    """
    if num_sites < 2:
        raise ValueError("need at least 2 sites")
    rng = np.random.default_rng(seed)
    coeffs = np.zeros((num_sites - 1, 16))
    for i in range(num_sites - 1):
        left = _random_hermitian_2x2(rng)
        right = _random_hermitian_2x2(rng)
        term = np.kron(left, right)
        coeffs[i] = pauli_coefficients(term, 2).real / 4.0
    return WindowOperatorSum(num_sites, 2, coeffs)


def to_dense(mps: MPS) -> np.ndarray:
    """Amplitude vector of an MPS (site 0 most significant index)."""
    dim = int(np.prod(mps.phys_dims))
    config.check_dense(dim, "dense state expansion")
    vec = mps.tensors[0].reshape(-1, mps.tensors[0].shape[2])
    for t in mps.tensors[1:]:
        vec = np.tensordot(vec, t, axes=(1, 0))
        vec = vec.reshape(-1, t.shape[2])
    return vec[:, 0]


def mps_from_dense(vec: np.ndarray, d: int = 2) -> MPS:
    """Exact MPS of a dense state vector via successive SVD splits."""
    vec = np.asarray(vec, dtype=complex)
    n = int(round(np.log(vec.size) / np.log(d)))
    if d ** n != vec.size:
        raise ValueError(f"vector length {vec.size} is not a power of {d}")
    tensors = []
    rest = vec.reshape(1, -1)
    for _ in range(n - 1):
        dl = rest.shape[0]
        mat = rest.reshape(dl * d, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep = max(1, int(np.count_nonzero(s > s[0] * 1e-14))) if s[0] > 0 else 1
        tensors.append(u[:, :keep].reshape(dl, d, keep))
        rest = s[:keep, None] * vh[:keep]
    tensors.append(rest.reshape(rest.shape[0], d, 1))
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def dense_ground_state(opsum: WindowOperatorSum, extremum: str = "min") -> tuple[float, np.ndarray]:
    """Exact extremal eigenpair by full dense diagonalization (oracle)."""
    h = apply_opsum_dense(opsum)
    vals, vecs = np.linalg.eigh(h)
    idx = 0 if extremum == "min" else -1
    return float(vals[idx]), vecs[:, idx]


def ground_state_lanczos(opsum: WindowOperatorSum, extremum: str = "min",
                         seed: int = 0, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Extremal eigenpair via matrix-free Lanczos (for chains past the dense
    matrix limit but within vector reach).  Deterministic start vector."""
    n = opsum.num_sites
    dim = 2 ** n
    config.check_dense(dim, "Lanczos ground-state vector")

    def matvec(v):
        return apply_opsum_to_vector(opsum, v.astype(complex))

    lin = scipy.sparse.linalg.LinearOperator((dim, dim), matvec=matvec, dtype=complex)
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    which = "SA" if extremum == "min" else "LA"
    vals, vecs = scipy.sparse.linalg.eigsh(lin, k=1, which=which, v0=v0, tol=tol)
    return float(vals[0]), vecs[:, 0]
