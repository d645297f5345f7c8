import numpy as np
import pytest

from mpstomo.pauli import (
    WindowOperatorSum,
    apply_opsum_dense,
    apply_opsum_to_vector,
    density_from_coefficients,
    enumerate_window_basis,
    expand_density,
    expectations,
    label_index,
    opsum_expectation,
    pauli_coefficients,
    pauli_expectation,
    pauli_word_matrix,
)
from mpstomo.mps import reduced_density
from mpstomo.states import cluster_state, ghz_state, product_state, random_mps, to_dense, w_state

from conftest import dense_partial_trace, dense_rho, embed_word, kron_chain


def test_enumerate_window_basis_k1():
    assert enumerate_window_basis(1) == ("I", "X", "Y", "Z")


def test_enumerate_window_basis_k2():
    basis = enumerate_window_basis(2)
    assert len(basis) == 16
    assert basis[0] == "II"
    assert basis[-1] == "ZZ"
    assert basis == tuple(sorted(basis, key=lambda s: ["IXYZ".index(c) for c in s]))


def test_enumerate_window_basis_k3_count():
    assert len(enumerate_window_basis(3)) == 64


@pytest.mark.parametrize("k", [1, 2, 3])
def test_pauli_coefficients_match_kron_traces(k, rng):
    a = rng.normal(size=(2 ** k, 2 ** k)) + 1j * rng.normal(size=(2 ** k, 2 ** k))
    a = a + a.conj().T
    coeffs = pauli_coefficients(a, k)
    for m, word in enumerate(enumerate_window_basis(k)):
        expected = np.trace(a @ kron_chain(pauli_word_matrix(c) for c in word))
        assert abs(coeffs[m] - expected) < 1e-10


def test_expand_density_trivial_cases():
    c = expand_density(np.eye(2) / 2)
    assert np.allclose(c, [1, 0, 0, 0], atol=1e-12)
    c = expand_density(np.diag([1.0, 0.0]))
    assert np.allclose(c, [1, 0, 0, 1], atol=1e-12)


def test_expand_density_w_state_reduction():
    dm = reduced_density(w_state(3), 0, 2)
    c = expand_density(dm)
    assert abs(c[label_index("XX")] - 2 / 3) < 1e-10


def test_expand_density_roundtrip(rng):
    for k in (1, 2, 3):
        a = rng.normal(size=(2 ** k, 2 ** k)) + 1j * rng.normal(size=(2 ** k, 2 ** k))
        a = (a + a.conj().T) / 2
        a = a / np.trace(a).real
        c = expand_density(a)
        back = density_from_coefficients(c, k)
        assert np.max(np.abs(back - a)) < 1e-10


def test_expand_density_rejects_non_hermitian(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    with pytest.raises(ValueError):
        expand_density(a)


def test_expectations_product_state():
    m = product_state([0] * 5)
    vals = expectations(m, 1)
    assert vals.shape == (5, 4)
    assert np.allclose(vals[:, label_index("Z")], 1.0, atol=1e-10)
    assert np.allclose(vals[:, label_index("I")], 1.0, atol=1e-10)


def test_expectations_cluster_stabilizers():
    n = 6
    m = cluster_state(n)
    for i in range(1, n - 1):
        assert abs(pauli_expectation(m, i - 1, "ZXZ") - 1.0) < 1e-10
    assert abs(pauli_expectation(m, 0, "XZ") - 1.0) < 1e-10
    assert abs(pauli_expectation(m, n - 2, "ZX") - 1.0) < 1e-10


@pytest.mark.parametrize("phase", [0.0, np.pi, np.pi / 3, 1.234])
def test_ghz_string_operator(phase):
    n = 7
    m = ghz_state(n, phase)
    val = pauli_expectation(m, 0, "X" * n)
    assert abs(val - np.cos(phase)) < 1e-10


@pytest.mark.parametrize("seed", [0, 1])
def test_expectations_against_dense(seed):
    n = 6
    m = random_mps(n, 3, seed=seed)
    rho = dense_rho(to_dense(m))
    vals = expectations(m, 2)
    for i in range(n - 1):
        for mm, word in enumerate(enumerate_window_basis(2)):
            oracle = np.trace(rho @ embed_word(word, i, n)).real
            assert abs(vals[i, mm] - oracle) < 1e-10


def test_apply_opsum_dense_single_z():
    op = WindowOperatorSum(1, 1)
    op.set(0, "Z", 1.0)
    assert np.allclose(apply_opsum_dense(op), np.diag([1, -1]), atol=1e-14)


def test_apply_opsum_dense_identity_coefficient():
    op = WindowOperatorSum(2, 2)
    op.set(0, "II", 0.7)
    assert np.allclose(apply_opsum_dense(op), 0.7 * np.eye(4), atol=1e-14)


def test_apply_opsum_dense_matches_independent_kron(rng):
    # random window-2 operator on 3 sites vs term-by-term embedding
    op = WindowOperatorSum(3, 2, rng.normal(size=(2, 16)))
    dense = apply_opsum_dense(op)
    oracle = np.zeros((8, 8), dtype=complex)
    for i in range(2):
        for m, word in enumerate(enumerate_window_basis(2)):
            oracle += op.coeffs[i, m] * embed_word(word, i, 3)
    assert np.max(np.abs(dense - oracle)) < 1e-10
    assert np.max(np.abs(dense - dense.conj().T)) < 1e-12


def test_apply_opsum_to_vector_matches_dense(rng):
    op = WindowOperatorSum(5, 2, rng.normal(size=(4, 16)))
    vec = rng.normal(size=32) + 1j * rng.normal(size=32)
    out = apply_opsum_to_vector(op, vec)
    assert np.max(np.abs(out - apply_opsum_dense(op) @ vec)) < 1e-10


def test_opsum_expectation_matches_dense(rng):
    op = WindowOperatorSum(6, 2, rng.normal(size=(5, 16)))
    m = random_mps(6, 3, seed=2)
    vec = to_dense(m)
    oracle = np.vdot(vec, apply_opsum_dense(op) @ vec).real
    assert abs(opsum_expectation(m, op) - oracle) < 1e-10


def test_opsum_arithmetic_stays_window_local(rng):
    a = WindowOperatorSum(5, 2, rng.normal(size=(4, 16)))
    b = WindowOperatorSum(5, 2, rng.normal(size=(4, 16)))
    c = 2.0 * a - b
    assert isinstance(c, WindowOperatorSum)
    assert c.window_size == 2
    assert np.allclose(c.coeffs, 2 * a.coeffs - b.coeffs)
    with pytest.raises(ValueError):
        a + WindowOperatorSum(5, 1)
