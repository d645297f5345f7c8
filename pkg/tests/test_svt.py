import numpy as np
import pytest

from mpstomo.eigensolver import SweepConfig, extremal_eigenstate
from mpstomo.mps import overlap
from mpstomo.pauli import WindowOperatorSum, label_index
from mpstomo.states import (
    dense_ground_state,
    ising_hamiltonian,
    mps_from_dense,
    product_state,
    to_dense,
    w_state,
)
from mpstomo.svt import (
    SVTConfig,
    build_data_operator,
    figure_of_merit,
    run_svt,
    svt_step,
)
from mpstomo.tomography import simulate_reductions


def test_build_data_operator_product_state():
    ds = simulate_reductions(product_state([0, 0, 0]), 1)
    r = build_data_operator(ds)
    assert r.get(0, "I") == 1.0
    assert r.get(0, "Z") == 1.0
    assert r.get(0, "X") == 0.0
    assert np.array_equal(r.coeffs, ds.coeffs)


def test_figure_of_merit_exact_match():
    target = w_state(4)
    ds = simulate_reductions(target, 2)
    assert figure_of_merit(target, ds) <= 1e-8


def test_figure_of_merit_flipped_chain():
    n = 5
    ds = simulate_reductions(product_state([1] * n), 1)
    x = figure_of_merit(product_state([0] * n), ds)
    assert abs(x - 2 * n) < 1e-10


def test_svt_step_zero_delta_is_identity():
    ds = simulate_reductions(w_state(4), 2)
    r = build_data_operator(ds)
    y = 0.3 * r
    sweep = SweepConfig(bond_dim=2, seed=0, max_sweeps=6)
    y2, state, val = svt_step(y, r, 0.0, sweep)
    assert np.array_equal(y2.coeffs, y.coeffs)


def test_svt_step_from_zero_gives_delta_r():
    ds = simulate_reductions(w_state(4), 2)
    r = build_data_operator(ds)
    y = WindowOperatorSum(4, 2)
    sweep = SweepConfig(bond_dim=2, seed=0, max_sweeps=6)
    y2, state, val = svt_step(y, r, 0.7, sweep)
    assert val == 0.0
    assert np.allclose(y2.coeffs, 0.7 * r.coeffs, atol=1e-14)


def test_svt_step_fixed_point_on_exact_product_data():
    # scale R so its top eigenvalue is 1: the step is then a null update
    n = 4
    target = product_state([0] * n)
    ds = simulate_reductions(target, 1)
    r = build_data_operator(ds)
    sweep = SweepConfig(bond_dim=2, seed=1, max_sweeps=10, tol=1e-12)
    top = extremal_eigenstate(r, sweep)
    y_star = (1.0 / top.eigenvalue) * r
    y2, state, val = svt_step(y_star, r, 1.0, sweep)
    assert abs(val - 1.0) < 1e-9
    assert np.max(np.abs(y2.coeffs - y_star.coeffs)) < 1e-8


def test_run_svt_single_iteration_zero_init():
    ds = simulate_reductions(w_state(4), 2)
    r = build_data_operator(ds)
    cfg = SVTConfig(bond_dim=2, n_iters=1, delta=0.9, seed=3)
    res = run_svt(ds, cfg)
    # the only iterate is the top eigenstate of delta_0 * R
    direct = extremal_eigenstate(0.9 * r, cfg.eigensolver)
    assert abs(abs(overlap(res.best_state, direct.state)) - 1.0) < 1e-6
    assert res.best_iteration == 1
    assert len(res.trace) >= 1


def test_run_svt_recovers_w_state_with_r_init():
    n = 6
    target = w_state(n)
    ds = simulate_reductions(target, 2)
    cfg = SVTConfig(bond_dim=2, n_iters=120, delta=1.0 / (4.0 * n), init="R", seed=1)
    res = run_svt(ds, cfg, reference=target)
    assert res.best_fidelity is not None
    assert res.best_fidelity > 0.99
    assert res.best_merit == min(p.merit for p in res.trace)


def test_run_svt_ising_noiseless_converges():
    n = 6
    _, gs = dense_ground_state(ising_hamiltonian(n))
    target = mps_from_dense(gs)
    ds = simulate_reductions(target, 2)
    cfg = SVTConfig(bond_dim=8, n_iters=400, delta=1.0 / (4.0 * n), init="zero",
                    seed=2, record_stride=10)
    res = run_svt(ds, cfg, reference=target)
    assert res.best_fidelity > 0.99
    merits = [p.merit for p in res.trace]
    assert merits[-1] < merits[0]


def test_run_svt_trace_and_stride():
    ds = simulate_reductions(w_state(4), 2)
    cfg = SVTConfig(bond_dim=2, n_iters=20, delta=0.05, init="R", seed=0,
                    record_stride=5)
    res = run_svt(ds, cfg)
    recorded = {p.iteration for p in res.trace}
    assert {0, 5, 10, 15, 20} <= recorded
    assert res.best_iteration in recorded


def test_window_locality_preserved():
    ds = simulate_reductions(w_state(5), 2)
    cfg = SVTConfig(bond_dim=2, n_iters=3, delta=0.1, seed=0)
    res = run_svt(ds, cfg)
    assert isinstance(res.final_operator, WindowOperatorSum)
    assert res.final_operator.window_size == 2
    assert res.final_operator.num_sites == 5


def test_svt_config_validation():
    with pytest.raises(ValueError):
        SVTConfig(bond_dim=2, n_iters=0)
    with pytest.raises(ValueError):
        SVTConfig(bond_dim=2, n_iters=1, init="other")
    cfg = SVTConfig(bond_dim=2, n_iters=3, delta=[0.1, 0.2])
    with pytest.raises(ValueError):
        cfg.step_size(2)
