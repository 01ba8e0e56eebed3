import numpy as np
import pytest

from weaksym import linalg
from weaksym.linalg import (
    dag,
    frob,
    hermitian_eigendecomposition,
    is_isometry,
    matrix_exponential,
    matrix_rank,
    null_space,
    orthonormal_columns,
    orthonormal_complement,
    unitary_eigendecomposition,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_unitary(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_eigh_diagonal():
    w, v = hermitian_eigendecomposition(np.diag([1.0, 2.0]))
    assert np.allclose(w, [1.0, 2.0])
    assert np.allclose(v, np.eye(2))


def test_eigh_pauli_x():
    w, v = hermitian_eigendecomposition(SX)
    assert np.allclose(w, [-1.0, 1.0])
    assert np.allclose(np.abs(v[:, 0]), [1 / np.sqrt(2)] * 2)
    assert np.allclose(SX @ v, v @ np.diag(w), atol=1e-13)


@pytest.mark.parametrize("seed", range(100))
def test_eigh_reconstruction(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 5)
    w, v = hermitian_eigendecomposition(a)
    assert frob(a @ v - v @ np.diag(w)) <= 1e-12 * max(1.0, frob(a))
    assert frob(dag(v) @ v - np.eye(5)) <= 1e-12
    assert frob(v @ np.diag(w) @ dag(v) - a) <= 1e-12 * max(1.0, frob(a))
    assert np.all(np.diff(w) >= -1e-14)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(linalg.NotHermitianError):
        hermitian_eigendecomposition(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eigh_deterministic():
    rng = np.random.default_rng(7)
    a = random_hermitian(rng, 6)
    w1, v1 = hermitian_eigendecomposition(a)
    w2, v2 = hermitian_eigendecomposition(a.copy())
    assert np.array_equal(w1, w2)
    assert np.array_equal(v1, v2)


def test_unitary_eig_identity():
    phases, _ = unitary_eigendecomposition(np.eye(3))
    assert np.allclose(phases, 0.0)


def test_unitary_eig_pauli_z():
    phases, v = unitary_eigendecomposition(SZ)
    assert np.allclose(phases, [0.0, np.pi])
    assert np.allclose(np.abs(v), np.eye(2))


def test_unitary_eig_cycle():
    u = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        u[(k + 1) % 4, k] = 1.0
    phases, v = unitary_eigendecomposition(u)
    assert np.allclose(sorted(phases), [0.0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12)
    assert frob(u @ v - v @ np.diag(np.exp(1j * phases))) < 1e-12


@pytest.mark.parametrize("seed", range(30))
def test_unitary_eig_reconstruction(seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 5)
    phases, v = unitary_eigendecomposition(u)
    assert frob(u @ v - v @ np.diag(np.exp(1j * phases))) < 1e-11
    assert frob(dag(v) @ v - np.eye(5)) < 1e-12
    assert np.all(phases >= 0) and np.all(phases < 2 * np.pi)


def test_unitary_eig_rejects_non_unitary():
    with pytest.raises(linalg.NotUnitaryError):
        unitary_eigendecomposition(2.0 * np.eye(2))


def test_null_space_identity_empty():
    assert null_space(np.eye(3)).shape == (3, 0)


def test_null_space_zero_matrix():
    basis = null_space(np.zeros((2, 3)))
    assert basis.shape == (3, 3)


def test_null_space_single_row():
    basis = null_space(np.array([[1.0, 1.0]]) / np.sqrt(2))
    assert basis.shape == (2, 1)
    expected = np.array([1.0, -1.0]) / np.sqrt(2)
    assert min(np.linalg.norm(basis[:, 0] - expected),
               np.linalg.norm(basis[:, 0] + expected)) < 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_null_space_annihilates(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
    basis = null_space(m)
    assert basis.shape[1] == 3
    assert frob(m @ basis) <= 1e-9 * frob(m)
    assert frob(dag(basis) @ basis - np.eye(3)) < 1e-12


def test_expm_zero():
    assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))


def test_expm_diagonal():
    r = matrix_exponential(np.diag([1.0, -1.0]))
    assert np.allclose(r, np.diag([np.e, 1.0 / np.e]), rtol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_expm_inverse_product(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    r = matrix_exponential(a) @ matrix_exponential(-a)
    assert frob(r - np.eye(6)) < 1e-10


def test_expm_large_norm_accuracy():
    rng = np.random.default_rng(3)
    h = random_hermitian(rng, 5)
    h *= 50.0 / frob(h)
    w, v = np.linalg.eigh(h)
    exact = (v * np.exp(-1j * w)) @ v.conj().T
    assert frob(matrix_exponential(-1j * h) - exact) < 1e-11 * frob(exact)


def test_is_isometry():
    assert is_isometry(np.eye(3))
    rng = np.random.default_rng(0)
    u = random_unitary(rng, 3)
    assert is_isometry(u[:, :1])
    assert not is_isometry(np.array([[1, 1], [1, 1]]) / np.sqrt(2))
    with pytest.raises(linalg.ShapeError):
        is_isometry(np.ones((1, 2)))


def test_orthonormal_columns_drops_dependent():
    v = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).T
    basis = orthonormal_columns(v.T)
    assert basis.shape[1] == 2


def test_orthonormal_complement():
    b = np.array([[1.0], [0.0], [0.0]], dtype=complex)
    c = orthonormal_complement(b, 3)
    assert c.shape == (3, 2)
    assert frob(dag(c) @ b) < 1e-12
    assert frob(dag(c) @ c - np.eye(2)) < 1e-12


def test_matrix_rank():
    assert matrix_rank(np.eye(4)) == 4
    assert matrix_rank(np.zeros((3, 3))) == 0
    assert matrix_rank(np.outer([1, 2, 3], [1, 0, 1])) == 1
