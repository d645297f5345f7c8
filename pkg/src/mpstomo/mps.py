"""Matrix product states on open chains.

A state is stored as one rank-3 tensor per site with index order
``(left bond, physical, right bond)``; the first and last bond dimensions
are 1.  The canonical gauge used throughout the package is

    sum_s M_i[s] M_i[s]^dag = 1   at every site i,

where ``M_i[s]`` denotes the ``D_i x D_{i+1}`` bond matrix at physical index
``s``.  In this gauge the state is normalized and every environment to the
right of a bond contracts to the identity, which the reduction and
expectation routines exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config
from .serialization import check_version, dump_json, load_json, pack_complex, unpack_complex

GAUGE_NONE = "none"
GAUGE_LEFT_CANONICAL = "left_canonical"

MPS_SCHEMA_VERSION = 1

# Relative singular-value cutoff used when splitting tensors without an
# explicit truncation request; only numerically-zero directions are dropped.
_RANK_EPS = 1e-14


class MPS:
    """Finite matrix product state with open boundary conditions.

    Parameters
    ----------
    tensors : list of ndarray
        One complex tensor per site, shape ``(D_left, d, D_right)``.
    gauge : str
        ``"none"`` or ``"left_canonical"``.  The flag records whether the
        tensors are known to satisfy the gauge condition; it is set by
        :func:`canonicalize_left` and trusted by downstream code.
    """

    def __init__(self, tensors, gauge: str = GAUGE_NONE):
        if gauge not in (GAUGE_NONE, GAUGE_LEFT_CANONICAL):
            raise ValueError(f"unknown gauge {gauge!r}")
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        self.gauge = gauge
        self._validate_shapes()

    def _validate_shapes(self) -> None:
        if not self.tensors:
            raise ValueError("an MPS needs at least one site")
        for i, t in enumerate(self.tensors):
            if t.ndim != 3:
                raise ValueError(f"site {i}: tensor must be rank 3, got rank {t.ndim}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for i in range(len(self.tensors) - 1):
            right = self.tensors[i].shape[2]
            left = self.tensors[i + 1].shape[0]
            if right != left:
                raise ValueError(
                    f"bond mismatch between sites {i} and {i + 1}: {right} vs {left}"
                )

    @property
    def num_sites(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    @property
    def bond_dims(self) -> list[int]:
        """All N+1 bond dimensions, including the two trivial boundary bonds."""
        return [self.tensors[0].shape[0]] + [t.shape[2] for t in self.tensors]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def copy(self) -> "MPS":
        return MPS([t.copy() for t in self.tensors], gauge=self.gauge)

    def __repr__(self) -> str:
        return f"MPS(N={self.num_sites}, D={self.max_bond}, gauge={self.gauge})"


@dataclass
class DensityMatrix:
    """Reduced density matrix on a contiguous window of sites.

    ``start`` is the 0-based index of the first site; the matrix acts on the
    tensor product of the window's physical spaces in site order.
    """

    start: int
    num_sites: int
    matrix: np.ndarray

    def validate(self, atol_herm: float = 1e-12, atol_trace: float = 1e-10) -> None:
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > atol_herm:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > atol_trace:
            raise ValueError("density matrix trace differs from 1 beyond tolerance")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue beyond tolerance")


def canonicalize_left(mps: MPS) -> MPS:
    """Bring an MPS to the gauge sum_s M[s] M[s]^dag = 1 at every site.

    The sweep runs right to left, orthonormalizing the rows of each reshaped
    tensor with an SVD and absorbing the remainder into the neighbour.  The
    output represents the same ray as the input (overlap modulus 1) and is
    normalized; numerically-zero bond directions are dropped.
    """
    tensors = [t.astype(complex, copy=True) for t in mps.tensors]
    n = len(tensors)
    for i in range(n - 1, 0, -1):
        dl, d, dr = tensors[i].shape
        mat = tensors[i].reshape(dl, d * dr)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            raise ValueError(f"MPS has vanishing weight at site {i}; cannot canonicalize")
        r = max(1, int(np.count_nonzero(s > s[0] * _RANK_EPS)))
        tensors[i] = vh[:r].reshape(r, d, dr)
        carry = u[:, :r] * s[:r]
        tensors[i - 1] = np.tensordot(tensors[i - 1], carry, axes=(2, 0))
    nrm = np.linalg.norm(tensors[0])
    if nrm == 0.0:
        raise ValueError("MPS has zero norm")
    tensors[0] = tensors[0] / nrm
    return MPS(tensors, gauge=GAUGE_LEFT_CANONICAL)


def overlap(a: MPS, b: MPS) -> complex:
    """Inner product <a|b> via left-to-right transfer contraction."""
    if a.num_sites != b.num_sites:
        raise ValueError(f"length mismatch: {a.num_sites} vs {b.num_sites}")
    if a.phys_dims != b.phys_dims:
        raise ValueError("physical dimension mismatch")
    env = np.ones((1, 1), dtype=complex)  # (bra bond of a, ket bond of b)
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.einsum("xy,xsa,ysb->ab", env, ta.conj(), tb)
    return complex(env[0, 0])


def norm(mps: MPS) -> float:
    return float(np.sqrt(max(overlap(mps, mps).real, 0.0)))


def _left_environments(tensors) -> list[np.ndarray]:
    """env[i][x, y] = sum over configs of sites < i of conj(prod)[x] prod[y]."""
    envs = [np.ones((1, 1), dtype=complex)]
    for t in tensors[:-1]:
        envs.append(np.einsum("xy,xsa,ysb->ab", envs[-1], t.conj(), t))
    return envs


def _window_block(tensors, start: int, length: int) -> np.ndarray:
    """Contract window tensors into a block of shape (D_l, d**w, D_r)."""
    blk = tensors[start]
    for j in range(start + 1, start + length):
        blk = np.tensordot(blk, tensors[j], axes=(blk.ndim - 1, 0))
    dl = blk.shape[0]
    dr = blk.shape[-1]
    return blk.reshape(dl, -1, dr)


def reduced_density(mps: MPS, start: int, length: int) -> DensityMatrix:
    """Partial trace of |psi><psi| onto sites start .. start+length-1.

    Works for any gauge; the complement is contracted exactly.  The window's
    dense dimension d**length must respect the configured dense limit.
    """
    n = mps.num_sites
    if length < 1 or start < 0 or start + length > n:
        raise ValueError(f"window ({start}, {length}) outside chain of {n} sites")
    dim = int(np.prod([mps.phys_dims[j] for j in range(start, start + length)]))
    config.check_dense(dim, f"reduction to a {length}-site window")

    left = np.ones((1, 1), dtype=complex)
    for t in mps.tensors[:start]:
        left = np.einsum("xy,xsa,ysb->ab", left, t.conj(), t)
    right = np.ones((1, 1), dtype=complex)
    for t in reversed(mps.tensors[start + length:]):
        right = np.einsum("xsa,ysb,ab->xy", t.conj(), t, right)

    blk = _window_block(mps.tensors, start, length)
    # rho[s, s'] = sum L[x, y] B[y, s, a] conj(B[x, s', b]) R[b, a]
    rho = np.einsum("xy,ysa,xtb,ba->st", left, blk, blk.conj(), right)
    tr = np.trace(rho).real
    if tr <= 0:
        raise ValueError("state has zero weight; cannot normalize reduction")
    rho = rho / tr
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(start=start, num_sites=length, matrix=rho)


def window_reduced_densities(mps: MPS, window: int) -> np.ndarray:
    """All reduced density matrices on sliding windows of ``window`` sites.

    Returns an array of shape ``(N - window + 1, d**window, d**window)``.
    The state is canonicalized first so right environments are trivial,
    making the full pass linear in the chain length.
    """
    n = mps.num_sites
    if window < 1 or window > n:
        raise ValueError(f"window size {window} outside chain of {n} sites")
    d = mps.phys_dims[0]
    if any(p != d for p in mps.phys_dims):
        raise ValueError("sliding-window reductions require a uniform local dimension")
    config.check_dense(d ** window, f"{window}-site window reductions")

    m = mps if mps.gauge == GAUGE_LEFT_CANONICAL else canonicalize_left(mps)
    envs = _left_environments(m.tensors)
    out = np.empty((n - window + 1, d ** window, d ** window), dtype=complex)
    for i in range(n - window + 1):
        blk = _window_block(m.tensors, i, window)
        rho = np.einsum("xy,ysa,xta->st", envs[i], blk, blk.conj())
        out[i] = (rho + rho.conj().T) / 2
    return out


def compress(mps: MPS, max_bond: int, tol: float = 0.0) -> tuple[MPS, float]:
    """Truncate an MPS to bond dimension ``max_bond``.

    ``tol`` additionally allows discarding trailing squared Schmidt weight up
    to that amount per bond.  Returns the compressed state (re-canonicalized)
    and the total discarded squared Schmidt weight across all bonds; the
    fidelity with the input is at least ``1 - weight``.
    """
    if max_bond < 1:
        raise ValueError("max_bond must be at least 1")
    m = mps if mps.gauge == GAUGE_LEFT_CANONICAL else canonicalize_left(mps)
    tensors = [t.copy() for t in m.tensors]
    n = len(tensors)
    discarded = 0.0
    center = np.ones((1, 1), dtype=complex)
    for i in range(n):
        t = np.tensordot(center, tensors[i], axes=(1, 0))
        if i == n - 1:
            nrm = np.linalg.norm(t)
            tensors[i] = t / nrm
            break
        dl, d, dr = t.shape
        u, s, vh = np.linalg.svd(t.reshape(dl * d, dr), full_matrices=False)
        w2 = s ** 2
        total = w2.sum()
        keep = min(max_bond, s.size)
        if tol > 0.0:
            while keep > 1 and w2[keep - 1:].sum() <= tol * total:
                keep -= 1
        discarded += float(w2[keep:].sum() / total)
        s_kept = s[:keep] / np.sqrt(w2[:keep].sum())
        tensors[i] = u[:, :keep].reshape(dl, d, keep)
        center = s_kept[:, None] * vh[:keep]
    out = canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))
    return out, float(discarded)


# ---------------------------------------------------------------------------
# Serialization (schema documented in docs/mps_schema.json)

def mps_to_json_dict(mps: MPS) -> dict:
    return {
        "version": MPS_SCHEMA_VERSION,
        "N": mps.num_sites,
        "phys_dims": mps.phys_dims,
        "bond_dims": mps.bond_dims,
        "gauge": mps.gauge,
        "tensors": [pack_complex(t) for t in mps.tensors],
    }


def mps_from_json_dict(data: dict) -> MPS:
    if not isinstance(data, dict):
        raise ValueError("MPS file must contain a JSON object")
    check_version(data.get("version"), MPS_SCHEMA_VERSION, "MPS")
    for field in ("N", "phys_dims", "bond_dims", "gauge", "tensors"):
        if field not in data:
            raise ValueError(f"MPS file is missing field {field!r}")
    n = data["N"]
    phys = data["phys_dims"]
    bonds = data["bond_dims"]
    if len(phys) != n or len(bonds) != n + 1 or len(data["tensors"]) != n:
        raise ValueError("MPS file has inconsistent lengths")
    tensors = []
    for i, packed in enumerate(data["tensors"]):
        shape = (bonds[i], phys[i], bonds[i + 1])
        tensors.append(unpack_complex(packed, shape))
    return MPS(tensors, gauge=data["gauge"])


def save_mps(mps: MPS, path) -> None:
    dump_json(mps_to_json_dict(mps), path)


def load_mps(path) -> MPS:
    return mps_from_json_dict(load_json(path))
