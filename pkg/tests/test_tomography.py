import numpy as np
import pytest

from mpstomo.pauli import label_index
from mpstomo.states import ghz_state, ising_hamiltonian, product_state, to_dense, w_state
from mpstomo.states import dense_ground_state, mps_from_dense
from mpstomo.tomography import (
    TomographyDataset,
    add_noise,
    dataset_from_dense,
    dataset_from_json_dict,
    dataset_to_json_dict,
    epsilon_against_oracle,
    load_dataset,
    save_dataset,
    simulate_reductions,
)

from conftest import dense_partial_trace, dense_rho, embed_word


def test_simulate_reductions_product_state():
    ds = simulate_reductions(product_state([0] * 4), 1)
    assert ds.num_windows == 4
    assert np.allclose(ds.coeffs[:, label_index("I")], 1.0, atol=1e-12)
    assert np.allclose(ds.coeffs[:, label_index("Z")], 1.0, atol=1e-12)
    assert np.allclose(ds.coeffs[:, label_index("X")], 0.0, atol=1e-12)
    assert np.all(ds.eps == 0.0)
    ds.validate_normalization()


def test_simulate_reductions_ising_ground_shape_and_values():
    n = 8
    _, gs = dense_ground_state(ising_hamiltonian(n))
    target = mps_from_dense(gs)
    ds = simulate_reductions(target, 2)
    assert ds.coeffs.shape == (7, 16)
    rho = dense_rho(gs)
    for i in (0, 3, 6):
        red = dense_partial_trace(rho, n, i, 2)
        for word in ("XX", "ZI", "IZ", "YY"):
            oracle = np.trace(red @ np.kron(embed_word(word[0], 0, 1), embed_word(word[1], 0, 1))).real
            assert abs(ds.coeffs[i, label_index(word)] - oracle) < 1e-10


def test_simulate_reductions_w_state_xx():
    ds = simulate_reductions(w_state(4), 2)
    assert abs(ds.coeffs[0, label_index("XX")] - 0.5) < 1e-10


def test_window_density_psd_trace_one():
    ds = simulate_reductions(w_state(5), 2)
    for i in range(ds.num_windows):
        sigma = ds.window_density(i)
        assert abs(np.trace(sigma).real - 1.0) < 1e-10
        assert np.min(np.linalg.eigvalsh(sigma)) > -1e-10


def test_dataset_from_dense_matches_mps_path():
    m = ghz_state(6, 0.4)
    a = simulate_reductions(m, 2)
    b = dataset_from_dense(to_dense(m), 6, 2)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-10
    rho = dense_rho(to_dense(m))
    c = dataset_from_dense(rho, 6, 2)
    assert np.max(np.abs(a.coeffs - c.coeffs)) < 1e-10


def test_add_noise_zero_sigma_is_identity():
    ds = simulate_reductions(w_state(4), 2)
    out = add_noise(ds, 0.0, seed=3)
    assert np.array_equal(out.coeffs, ds.coeffs)
    assert np.array_equal(out.eps, ds.eps)


def test_add_noise_deterministic_and_identity_untouched():
    ds = simulate_reductions(w_state(6), 2)
    a = add_noise(ds, 0.01, seed=42)
    b = add_noise(ds, 0.01, seed=42)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert np.array_equal(a.eps, b.eps)
    c = add_noise(ds, 0.01, seed=43)
    assert not np.array_equal(a.coeffs, c.coeffs)
    assert np.allclose(a.coeffs[:, 0], 1.0, atol=1e-14)
    assert a.metadata["noise_sigma"] == 0.01
    assert a.metadata["seed"] == 42


def test_noise_eps_matches_oracle_distance():
    target = w_state(8)
    ds = simulate_reductions(target, 2)
    noisy = add_noise(ds, 0.01, seed=7)
    oracle = epsilon_against_oracle(noisy, target)
    assert np.max(np.abs(noisy.eps - oracle)) < 1e-12


def test_single_coefficient_perturbation_eps():
    target = w_state(5)
    ds = simulate_reductions(target, 2)
    delta = 0.037
    ds2 = ds.copy()
    ds2.coeffs[2, label_index("XZ")] += delta
    eps = epsilon_against_oracle(ds2, target)
    # perturbing one Pauli coefficient by delta shifts sigma by delta*P/2^w,
    # whose trace norm is exactly delta
    assert abs(eps[2] - delta) < 1e-12
    assert np.max(np.abs(np.delete(eps, 2))) < 1e-12


def test_noiseless_epsilon_oracle_is_zero():
    target = ghz_state(6, 1.1)
    ds = simulate_reductions(target, 2)
    assert np.max(epsilon_against_oracle(ds, target)) < 1e-10


def test_dataset_roundtrip(tmp_path):
    ds = add_noise(simulate_reductions(w_state(5), 2), 0.005, seed=1)
    path = tmp_path / "data.json"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert back.num_sites == ds.num_sites
    assert back.window_size == ds.window_size
    assert np.array_equal(back.coeffs, ds.coeffs)
    assert np.array_equal(back.eps, ds.eps)
    assert back.metadata["noise_sigma"] == 0.005


def test_dataset_rejects_wrong_window_count():
    d = dataset_to_json_dict(simulate_reductions(w_state(4), 2))
    d["windows"] = d["windows"][:-1]
    with pytest.raises(ValueError):
        dataset_from_json_dict(d)


def test_dataset_rejects_future_version():
    from mpstomo.serialization import SchemaVersionError

    d = dataset_to_json_dict(simulate_reductions(w_state(4), 2))
    d["version"] = 2
    with pytest.raises(SchemaVersionError):
        dataset_from_json_dict(d)


def test_dataset_field_validation():
    with pytest.raises(ValueError):
        TomographyDataset(4, 2, np.zeros((3, 15)), np.zeros(3))
    with pytest.raises(ValueError):
        TomographyDataset(4, 2, np.zeros((3, 16)), -np.ones(3))
