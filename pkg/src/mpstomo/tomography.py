"""Simulated local tomographic datasets.

A dataset holds, for every sliding window of ``w`` adjacent qubits, the
expectation values of all 4**w window Pauli words, together with a
trace-norm error radius per window and provenance metadata.  This is the
experimental interface of the package: reconstruction and certification
consume nothing but these numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .mps import MPS
from .pauli import (
    density_from_coefficients,
    enumerate_window_basis,
    expectations,
    pauli_coefficients,
)
from .serialization import check_version, dump_json, load_json

DATASET_SCHEMA_VERSION = 1


@dataclass
class TomographyDataset:
    """Per-window Pauli expectations with error radii.

    ``coeffs[i, m]`` is the measured value of window word m (lexicographic
    order) on sites ``i .. i+w-1``; ``eps[i]`` is a trace-norm radius within
    which the reassembled window matrix is trusted to contain the true
    reduction.  ``metadata`` records how the numbers were produced.
    """

    num_sites: int
    window_size: int
    coeffs: np.ndarray
    eps: np.ndarray
    metadata: dict = field(default_factory=dict)
    d: int = 2

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.eps = np.asarray(self.eps, dtype=float)
        nw = self.num_windows
        if self.coeffs.shape != (nw, 4 ** self.window_size):
            raise ValueError(
                f"coefficients must have shape {(nw, 4 ** self.window_size)}, "
                f"got {self.coeffs.shape}"
            )
        if self.eps.shape != (nw,):
            raise ValueError(f"eps must have shape {(nw,)}, got {self.eps.shape}")
        if np.any(self.eps < 0):
            raise ValueError("error radii must be non-negative")

    @property
    def num_windows(self) -> int:
        return self.num_sites - self.window_size + 1

    def window_density(self, i: int) -> np.ndarray:
        """Reassembled window matrix sigma_i = 2**-w sum_m c_m P_m."""
        return density_from_coefficients(self.coeffs[i], self.window_size)

    def validate_normalization(self, bound: float = 1e-10) -> None:
        """Identity-word coefficients must equal 1 (trace normalization)."""
        dev = np.max(np.abs(self.coeffs[:, 0] - 1.0))
        if dev > bound:
            raise ValueError(f"identity coefficients deviate from 1 by {dev}")

    def copy(self) -> "TomographyDataset":
        return TomographyDataset(self.num_sites, self.window_size,
                                 self.coeffs.copy(), self.eps.copy(),
                                 dict(self.metadata), self.d)


def simulate_reductions(target: MPS, window_size: int,
                        description: str = "mps") -> TomographyDataset:
    """Exact window expectations of an MPS target; all error radii zero."""
    if window_size < 1 or window_size > target.num_sites:
        raise ValueError("window size must lie within the chain")
    vals = expectations(target, window_size)
    eps = np.zeros(vals.shape[0])
    meta = {
        "source": description,
        "num_sites": target.num_sites,
        "noise_sigma": 0.0,
        "seed": None,
    }
    return TomographyDataset(target.num_sites, window_size, vals, eps, meta)


def dataset_from_dense(state: np.ndarray, num_sites: int, window_size: int,
                       description: str = "dense") -> TomographyDataset:
    """Exact window expectations of a dense pure state or density matrix."""
    dim = 2 ** num_sites
    config.check_dense(dim, "dense-state tomography simulation")
    state = np.asarray(state, dtype=complex)
    if state.shape == (dim,):
        rho = None
        vec = state / np.linalg.norm(state)
    elif state.shape == (dim, dim):
        rho = state / np.trace(state).real
        vec = None
    else:
        raise ValueError(f"state must be a length-{dim} vector or {dim}x{dim} matrix")
    w = window_size
    nw = num_sites - w + 1
    coeffs = np.empty((nw, 4 ** w))
    for i in range(nw):
        left, mid, right = 2 ** i, 2 ** w, 2 ** (num_sites - i - w)
        if vec is not None:
            v = vec.reshape(left, mid, right)
            red = np.einsum("amb,anb->mn", v, v.conj())
        else:
            r = rho.reshape(left, mid, right, left, mid, right)
            red = np.einsum("ambanb->mn", r)
        coeffs[i] = pauli_coefficients(red, w).real
    meta = {"source": description, "num_sites": num_sites, "noise_sigma": 0.0, "seed": None}
    return TomographyDataset(num_sites, w, coeffs, np.zeros(nw), meta)


def _perturbation_trace_norms(delta_coeffs: np.ndarray, window_size: int) -> np.ndarray:
    mats = density_from_coefficients(delta_coeffs, window_size)
    vals = np.linalg.eigvalsh(mats)
    return np.abs(vals).sum(axis=-1)


def add_noise(ds: TomographyDataset, sigma: float, seed: int) -> TomographyDataset:
    """Gaussian-perturb every non-identity coefficient (zero mean, s.d. sigma).

    Identity words carry the trace normalization and are left untouched.
    Error radii grow by the exact trace norm of each window's added
    perturbation operator, so radii remain valid relative to the original
    reference.  Draws are window-major, label-minor, from the seeded PCG64
    generator; a given (sigma, seed) is bit-reproducible.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    out = ds.copy()
    out.metadata = dict(ds.metadata)
    out.metadata.update({"noise_sigma": float(sigma), "seed": int(seed)})
    if sigma == 0.0:
        return out
    rng = np.random.default_rng(seed)
    nw = ds.num_windows
    n_labels = 4 ** ds.window_size
    delta = np.zeros((nw, n_labels))
    delta[:, 1:] = rng.normal(0.0, sigma, size=(nw, n_labels - 1))
    out.coeffs = ds.coeffs + delta
    out.eps = ds.eps + _perturbation_trace_norms(delta, ds.window_size)
    return out


def epsilon_against_oracle(ds: TomographyDataset, target: MPS) -> np.ndarray:
    """Trace-norm distances between reassembled windows and exact reductions.

    Requires oracle access to the target state; used to calibrate the error
    radii of simulated noisy data.
    """
    if target.num_sites != ds.num_sites:
        raise ValueError("chain length mismatch")
    exact = expectations(target, ds.window_size)
    return _perturbation_trace_norms(ds.coeffs - exact, ds.window_size)


# ---------------------------------------------------------------------------
# Serialization (schema documented in docs/dataset_schema.json)

def dataset_to_json_dict(ds: TomographyDataset) -> dict:
    windows = []
    for i in range(ds.num_windows):
        windows.append({
            "start": i,
            "coeffs": [float(c) for c in ds.coeffs[i]],
            "epsilon": float(ds.eps[i]),
        })
    return {
        "version": DATASET_SCHEMA_VERSION,
        "N": ds.num_sites,
        "d": ds.d,
        "window_size": ds.window_size,
        "labels": list(enumerate_window_basis(ds.window_size)),
        "windows": windows,
        "metadata": ds.metadata,
    }


def dataset_from_json_dict(data: dict) -> TomographyDataset:
    if not isinstance(data, dict):
        raise ValueError("dataset file must contain a JSON object")
    check_version(data.get("version"), DATASET_SCHEMA_VERSION, "dataset")
    for fieldname in ("N", "window_size", "windows"):
        if fieldname not in data:
            raise ValueError(f"dataset file is missing field {fieldname!r}")
    n = data["N"]
    w = data["window_size"]
    windows = data["windows"]
    if len(windows) != n - w + 1:
        raise ValueError(
            f"dataset has {len(windows)} windows, expected {n - w + 1}"
        )
    coeffs = np.zeros((n - w + 1, 4 ** w))
    eps = np.zeros(n - w + 1)
    for i, win in enumerate(windows):
        if win.get("start") != i:
            raise ValueError(f"window {i} has start {win.get('start')}; must be ordered")
        row = np.asarray(win["coeffs"], dtype=float)
        if row.shape != (4 ** w,):
            raise ValueError(f"window {i} has {row.size} coefficients, expected {4 ** w}")
        coeffs[i] = row
        eps[i] = float(win.get("epsilon", 0.0))
    return TomographyDataset(n, w, coeffs, eps, data.get("metadata", {}),
                             d=data.get("d", 2))


def save_dataset(ds: TomographyDataset, path) -> None:
    dump_json(dataset_to_json_dict(ds), path)


def load_dataset(path) -> TomographyDataset:
    return dataset_from_json_dict(load_json(path))
