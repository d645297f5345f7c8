"""Iterative MPS reconstruction from window expectations.

The loop is singular value thresholding restricted to window-local operator
coefficients: maintain a running operator Y, extract its top variational
eigenstate |y>, form the feedback term X = y_val * (expectations of |y>),
and move Y toward the data operator R built from the measured values,

    Y_{n+1} = Y_n + delta_n (R - X_n).

Because Y, R and X all live in the window-local Pauli span, every step is
polynomial in the chain length; the eigenstate extraction is the
variational sweep solver, warm-started from the previous iterate.  The
reported state is the iterate with the smallest absolute-deviation merit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .eigensolver import SweepConfig, extremal_eigenstate
from .mps import MPS, overlap
from .pauli import WindowOperatorSum, expectations
from .tomography import TomographyDataset


@dataclass
class SVTConfig:
    """Knobs for one reconstruction run.

    ``delta`` is a constant step size or a per-iteration sequence of length
    ``n_iters``.  ``init`` selects the zero operator or the data operator R
    as the starting point.  ``eigensolver`` configures the cold (first)
    eigenstate extraction; warm-started extractions reuse it with sweeps
    capped at ``warm_sweeps`` (two-site mode is kept so the bond dimension
    can regrow when an iterate passes through a low-rank state).  Trace
    points are kept every ``record_stride`` iterations (new-best iterations
    are always kept).
    """

    bond_dim: int
    n_iters: int
    delta: float | list[float] = 1.0
    init: str = "zero"
    eigensolver: SweepConfig | None = None
    record_stride: int = 1
    warm_sweeps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_iters < 1:
            raise ValueError("n_iters must be at least 1")
        if self.init not in ("zero", "R"):
            raise ValueError("init must be 'zero' or 'R'")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        if self.eigensolver is None:
            self.eigensolver = SweepConfig(bond_dim=self.bond_dim, max_sweeps=10,
                                           tol=1e-9, extremum="max", seed=self.seed)
        if self.eigensolver.extremum != "max":
            raise ValueError("the reconstruction loop extracts the top eigenstate")

    def step_size(self, n: int) -> float:
        if np.isscalar(self.delta):
            return float(self.delta)
        seq = list(self.delta)
        if len(seq) < self.n_iters:
            raise ValueError("delta sequence shorter than n_iters")
        return float(seq[n])


@dataclass
class TracePoint:
    iteration: int
    eigenvalue: float
    merit: float
    fidelity: float | None = None


@dataclass
class ReconstructionResult:
    best_state: MPS
    best_iteration: int
    best_merit: float
    trace: list[TracePoint]
    final_operator: WindowOperatorSum
    best_fidelity: float | None = None
    solver_all_converged: bool = True


def build_data_operator(ds: TomographyDataset) -> WindowOperatorSum:
    """Operator R whose coefficients are the measured window expectations."""
    return WindowOperatorSum(ds.num_sites, ds.window_size, ds.coeffs)


def figure_of_merit(y: MPS, ds: TomographyDataset) -> float:
    """Sum of |p_m,i - <y|P_m^i|y>| over all windows and non-identity words."""
    vals = expectations(y, ds.window_size)
    return _merit(vals, ds.coeffs)


def _merit(vals: np.ndarray, data: np.ndarray) -> float:
    return float(np.abs(data[:, 1:] - vals[:, 1:]).sum())


def svt_step(y_operator: WindowOperatorSum, data_operator: WindowOperatorSum,
             step_size: float, sweep: SweepConfig,
             warm: MPS | None = None) -> tuple[WindowOperatorSum, MPS, float]:
    """One thresholding step: extract |y| from Y, feed back, move toward R.

    Returns (updated operator, extracted state, extracted eigenvalue).  The
    eigenvalue of the zero operator is 0, so the first step from a zero
    initialization moves Y to step_size * R regardless of the arbitrary
    eigenstate returned.
    """
    res = extremal_eigenstate(y_operator, sweep, warm_start=warm)
    vals = expectations(res.state, y_operator.window_size)
    x_coeffs = res.eigenvalue * vals
    updated = WindowOperatorSum(
        y_operator.num_sites, y_operator.window_size,
        y_operator.coeffs + step_size * (data_operator.coeffs - x_coeffs))
    return updated, res.state, res.eigenvalue


def run_svt(ds: TomographyDataset, cfg: SVTConfig,
            reference: MPS | None = None) -> ReconstructionResult:
    """Full reconstruction run with best-iterate selection.

    Executes ``n_iters`` update steps (plus an initial extraction when
    ``init='R'``), warm-starting each eigensolve from the previous iterate,
    and returns the iterate with minimum merit.  When ``reference`` is
    given, recorded trace points carry the fidelity |<ref|y_n>|^2 as a
    diagnostic; it plays no role in iterate selection.
    """
    r_op = build_data_operator(ds)
    w = ds.window_size
    n_sites = ds.num_sites
    cold = cfg.eigensolver
    warm_cfg = replace(cold, max_sweeps=cfg.warm_sweeps)

    trace: list[TracePoint] = []
    best_state = None
    best_iter = -1
    best_merit = np.inf
    best_fid = None
    all_converged = True

    def fidelity(state: MPS) -> float | None:
        if reference is None:
            return None
        return float(abs(overlap(reference, state)) ** 2)

    def consider(n: int, state: MPS, lam: float, vals: np.ndarray) -> None:
        nonlocal best_state, best_iter, best_merit, best_fid
        x = _merit(vals, r_op.coeffs)
        new_best = x < best_merit
        if new_best:
            best_state, best_iter, best_merit = state, n, x
        if new_best or n % cfg.record_stride == 0 or n == cfg.n_iters:
            f = fidelity(state)
            if new_best:
                best_fid = f
            trace.append(TracePoint(n, float(lam), x, f))

    y_op = r_op.copy() if cfg.init == "R" else WindowOperatorSum(n_sites, w)
    prev_state: MPS | None = None
    x_coeffs = np.zeros_like(r_op.coeffs)

    if cfg.init == "R":
        res = extremal_eigenstate(y_op, cold)
        all_converged &= res.converged
        vals = expectations(res.state, w)
        x_coeffs = res.eigenvalue * vals
        prev_state = res.state
        consider(0, res.state, res.eigenvalue, vals)

    for n in range(1, cfg.n_iters + 1):
        y_op.coeffs += cfg.step_size(n - 1) * (r_op.coeffs - x_coeffs)
        if prev_state is None:
            res = extremal_eigenstate(y_op, cold)
        else:
            res = extremal_eigenstate(y_op, warm_cfg, warm_start=prev_state)
        all_converged &= res.converged
        vals = expectations(res.state, w)
        x_coeffs = res.eigenvalue * vals
        prev_state = res.state
        consider(n, res.state, res.eigenvalue, vals)

    return ReconstructionResult(
        best_state=best_state,
        best_iteration=best_iter,
        best_merit=best_merit,
        trace=trace,
        final_operator=y_op,
        best_fidelity=best_fid,
        solver_all_converged=all_converged,
    )
