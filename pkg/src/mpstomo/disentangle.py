"""Sequential disentangling reconstruction.

Walking left to right, each step takes the reduced density matrix of the
first ``kappa`` remaining sites, rotates its dominant d**(kappa-1)-dimensional
eigenspace into the sector where the leading qudit reads |0>, measures that
qudit, and post-selects on 0.  The recorded per-step weights are the
populations lost to the discarded eigenspace; the inverse circuit applied to
|0...0> and the terminal boundary state reproduces the state as an MPS of
bond dimension d**(kappa-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .mps import GAUGE_NONE, MPS, canonicalize_left, overlap, reduced_density
from .serialization import check_version, dump_json, load_json, pack_complex, unpack_complex
from .states import mps_from_dense, to_dense

CIRCUIT_SCHEMA_VERSION = 1

_TIE_EPS = 1e-12


@dataclass
class DisentangleCircuit:
    """Ordered disentangling unitaries with boundary state and step weights.

    ``unitaries[i]`` acts on sites i .. i+kappa-1 (0-based); ``eta`` is the
    dense boundary state on the last kappa-1 sites; ``eps[i]`` is the
    population measured outside |0> on site i after applying unitary i.
    """

    kappa: int
    num_sites: int
    d: int
    unitaries: list = field(default_factory=list)
    eta: np.ndarray | None = None
    eps: list = field(default_factory=list)

    def validate(self, atol: float = 1e-10) -> None:
        if len(self.unitaries) != self.num_sites - self.kappa + 1:
            raise ValueError("wrong number of unitaries for chain length")
        dim = self.d ** self.kappa
        for i, u in enumerate(self.unitaries):
            if u.shape != (dim, dim):
                raise ValueError(f"unitary {i} has shape {u.shape}")
            if np.max(np.abs(u @ u.conj().T - np.eye(dim))) > atol:
                raise ValueError(f"unitary {i} is not unitary within {atol}")
        for e in self.eps:
            if not -1e-12 <= e <= 1.0 + 1e-12:
                raise ValueError("step weights must lie in [0, 1]")


def _ordered_eigensystem(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by descending eigenvalue.

    Ties (within 1e-12) are broken by lexicographic comparison of the
    phase-fixed eigenvector entries so degenerate spectra still produce a
    reproducible circuit.
    """
    vals, vecs = np.linalg.eigh(sigma)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    # phase fix: largest-magnitude entry real positive
    for j in range(vecs.shape[1]):
        k = int(np.argmax(np.abs(vecs[:, j])))
        ph = vecs[k, j]
        if abs(ph) > 0:
            vecs[:, j] = vecs[:, j] * (abs(ph) / ph)
    order = list(range(len(vals)))
    def key(j):
        return tuple(np.round(np.concatenate([vecs[:, j].real, vecs[:, j].imag]), 9))
    i = 0
    while i < len(vals):
        j = i
        while j + 1 < len(vals) and abs(vals[j + 1] - vals[i]) <= _TIE_EPS:
            j += 1
        if j > i:
            order[i:j + 1] = sorted(order[i:j + 1], key=key)
        i = j + 1
    return vals[order], vecs[:, order]


def _complete_basis(kept: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full basis by orthonormalizing the
    standard basis vectors against them in index order."""
    cols = [kept[:, j] for j in range(kept.shape[1])]
    for j in range(dim):
        if len(cols) == dim:
            break
        v = np.zeros(dim, dtype=complex)
        v[j] = 1.0
        for _ in range(2):  # twice for numerical orthogonality
            for c in cols:
                v = v - c * np.vdot(c, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-7:
            cols.append(v / nrm)
    if len(cols) != dim:
        raise RuntimeError("basis completion failed")
    return np.stack(cols, axis=1)


def disentangling_unitary(sigma, d: int = 2) -> tuple[np.ndarray, float]:
    """Rotation mapping the dominant eigenspace of a window reduction into
    the |0>-leading sector.

    ``sigma`` may be a :class:`~mpstomo.mps.DensityMatrix` or a plain
    Hermitian PSD matrix on kappa sites.  Returns the unitary and the
    truncation weight (total eigenvalue mass outside the kept
    d**(kappa-1)-dimensional subspace).
    """
    mat = sigma.matrix if hasattr(sigma, "matrix") else np.asarray(sigma, dtype=complex)
    dim = mat.shape[0]
    kappa = int(round(np.log(dim) / np.log(d)))
    if d ** kappa != dim:
        raise ValueError(f"matrix dimension {dim} is not a power of {d}")
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
        raise ValueError("window matrix is not Hermitian within tolerance")
    vals, vecs = _ordered_eigensystem((mat + mat.conj().T) / 2)
    if vals[-1] < -1e-10:
        raise ValueError("window matrix is not positive semidefinite within tolerance")
    keep = d ** (kappa - 1)
    weight = float(np.clip(vals[keep:], 0.0, None).sum() / np.clip(vals, 0.0, None).sum())
    basis = _complete_basis(vecs[:, :keep], dim)
    return basis.conj().T, weight


def _window_to_tensors(block: np.ndarray, nsites: int, d: int, left_dim: int = 1):
    """Split a dense window block (left_dim, d**nsites, right_dim) into
    site tensors by successive SVDs, keeping numerically nonzero ranks."""
    tensors = []
    rest = block.reshape(left_dim, -1)
    right_dim = block.shape[-1]
    for j in range(nsites - 1):
        dl = rest.shape[0]
        mat = rest.reshape(dl * d, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep = max(1, int(np.count_nonzero(s > s[0] * 1e-13))) if s[0] > 0 else 1
        tensors.append(u[:, :keep].reshape(dl, d, keep))
        rest = s[:keep, None] * vh[:keep]
    tensors.append(rest.reshape(rest.shape[0], d, right_dim))
    return tensors


def _apply_window_unitary(tensors: list, start: int, u: np.ndarray, d: int) -> list:
    """Apply a kappa-site unitary to an MPS window and re-split."""
    kappa = int(round(np.log(u.shape[0]) / np.log(d)))
    blk = tensors[start]
    for j in range(start + 1, start + kappa):
        blk = np.tensordot(blk, tensors[j], axes=(blk.ndim - 1, 0))
    dl = blk.shape[0]
    dr = blk.shape[-1]
    blk = blk.reshape(dl, -1, dr)
    rotated = np.einsum("pq,aqb->apb", u, blk)
    new = _window_to_tensors(rotated, kappa, d, left_dim=dl)
    return tensors[:start] + new + tensors[start + kappa:]


def run_disentangle(state: MPS, kappa: int) -> DisentangleCircuit:
    """Construct the full disentangling circuit for a simulated state.

    Each step uses the exact reduction of the current (post-selected) state,
    so the recorded weights equal the eigenvalue mass discarded by each
    truncation.
    """
    if kappa < 2:
        raise ValueError("kappa must be at least 2")
    n = state.num_sites
    if kappa > n:
        raise ValueError("kappa exceeds the chain length")
    d = state.phys_dims[0]
    if any(p != d for p in state.phys_dims):
        raise ValueError("disentangling requires a uniform local dimension")
    config.check_dense(d ** kappa, f"{kappa}-site disentangling window")

    circuit = DisentangleCircuit(kappa=kappa, num_sites=n, d=d)
    rest = canonicalize_left(state)
    for step in range(n - kappa + 1):
        sigma = reduced_density(rest, 0, kappa)
        u, _ = disentangling_unitary(sigma.matrix, d)
        tensors = _apply_window_unitary([t.copy() for t in rest.tensors], 0, u, d)
        # project the leading site onto |0>; the lost population is the
        # norm deficit of the projected (still unnormalized) chain
        slice0 = tensors[0][:, 0, :]
        merged = np.tensordot(slice0, tensors[1], axes=(1, 0))
        projected = MPS([merged] + tensors[2:], gauge=GAUGE_NONE)
        p0 = float(overlap(projected, projected).real)
        if p0 < 1e-14:
            raise RuntimeError("post-selection weight vanished; state left the kept subspace")
        circuit.unitaries.append(u)
        circuit.eps.append(float(min(1.0, max(0.0, 1.0 - p0))))
        rest = canonicalize_left(projected)
    circuit.eta = to_dense(rest)
    return circuit


def circuit_to_mps(circuit: DisentangleCircuit) -> MPS:
    """Reconstruct the state U_1^dag ... U_M^dag (|0...0> (x) eta).

    The staircase structure bounds the bond dimension by d**(kappa-1).
    """
    circuit.validate()
    n, d, kappa = circuit.num_sites, circuit.d, circuit.kappa
    m = n - kappa + 1
    zero = np.zeros((1, d, 1), dtype=complex)
    zero[0, 0, 0] = 1.0
    tensors = [zero.copy() for _ in range(m)]
    eta = np.asarray(circuit.eta, dtype=complex)
    eta = eta / np.linalg.norm(eta)
    if kappa > 1:
        tensors += [t.astype(complex) for t in
                    _window_to_tensors(eta.reshape(1, -1, 1), kappa - 1, d)]
    for i in range(m - 1, -1, -1):
        tensors = _apply_window_unitary(tensors, i, circuit.unitaries[i].conj().T, d)
    return canonicalize_left(MPS(tensors, gauge=GAUGE_NONE))


def error_bound(circuit: DisentangleCircuit) -> float:
    """Certified bound sum_i sqrt(eps_i) on the reconstruction deviation.

    Bounds the distance of the true state from the reconstructed ray: with
    per-step lost populations eps_i, the overlap obeys
    |<phi|psi>|^2 >= prod_i (1 - eps_i), giving
    sqrt(1 - prod(1 - eps_i)) <= sum_i sqrt(eps_i).
    """
    return float(sum(np.sqrt(max(0.0, e)) for e in circuit.eps))


def ray_distance(a: MPS, b: MPS) -> float:
    """Phase-invariant deviation sqrt(1 - |<a|b>|^2)."""
    ov = abs(overlap(a, b)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - min(ov, 1.0))))


# ---------------------------------------------------------------------------
# Serialization (schema documented in docs/circuit_schema.json)

def circuit_to_json_dict(circuit: DisentangleCircuit) -> dict:
    return {
        "version": CIRCUIT_SCHEMA_VERSION,
        "N": circuit.num_sites,
        "d": circuit.d,
        "kappa": circuit.kappa,
        "unitaries": [pack_complex(u) for u in circuit.unitaries],
        "eta": pack_complex(np.asarray(circuit.eta)),
        "eps": [float(e) for e in circuit.eps],
    }


def circuit_from_json_dict(data: dict) -> DisentangleCircuit:
    if not isinstance(data, dict):
        raise ValueError("circuit file must contain a JSON object")
    check_version(data.get("version"), CIRCUIT_SCHEMA_VERSION, "circuit")
    for fieldname in ("N", "d", "kappa", "unitaries", "eta", "eps"):
        if fieldname not in data:
            raise ValueError(f"circuit file is missing field {fieldname!r}")
    n, d, kappa = data["N"], data["d"], data["kappa"]
    dim = d ** kappa
    unitaries = [unpack_complex(u, (dim, dim)) for u in data["unitaries"]]
    eta = unpack_complex(data["eta"], (d ** (kappa - 1),))
    circuit = DisentangleCircuit(kappa=kappa, num_sites=n, d=d,
                                 unitaries=unitaries, eta=eta,
                                 eps=[float(e) for e in data["eps"]])
    circuit.validate()
    return circuit


def save_circuit(circuit: DisentangleCircuit, path) -> None:
    dump_json(circuit_to_json_dict(circuit), path)


def load_circuit(path) -> DisentangleCircuit:
    return circuit_from_json_dict(load_json(path))
