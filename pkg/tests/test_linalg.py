import numpy as np
import pytest
import scipy.sparse as sps

from richcont.linalg import LinearSolveError, as_csr, equilibrate, matvec, solve, transpose_matvec


def test_identity():
    b = np.arange(5.0)
    np.testing.assert_array_equal(solve(sps.identity(5), b), b)


def test_two_by_two():
    x = solve(sps.csr_matrix([[2.0, 1.0], [1.0, 2.0]]), np.array([3.0, 3.0]))
    np.testing.assert_allclose(x, [1.0, 1.0], rtol=1e-15)


def test_indefinite_saddle_point():
    # [[M, -B^T], [B, 0]] with M SPD: indefinite but nonsingular
    M = np.diag([2.0, 3.0, 4.0])
    B = np.array([[1.0, -1.0, 0.5]])
    A = np.block([[M, -B.T], [B, np.zeros((1, 1))]])
    rng = np.random.default_rng(0)
    b = rng.normal(size=4)
    x = solve(sps.csr_matrix(A), b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_residual_bound_on_random_spd(rng):
    n = 50
    Q = rng.normal(size=(n, n))
    A = sps.csr_matrix(Q @ Q.T + n * np.eye(n))
    b = rng.normal(size=n)
    x = solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_singular_reported():
    A = sps.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(LinearSolveError):
        solve(A, np.array([1.0, 0.0]))


def test_zero_rhs():
    assert np.all(solve(sps.identity(3, format="csr") * 2, np.zeros(3)) == 0)


def test_as_csr_canonical():
    A = sps.coo_matrix((np.array([1.0, 2.0, 3.0]), (np.array([0, 0, 1]), np.array([1, 1, 0]))), shape=(2, 2))
    C = as_csr(A)
    assert C.has_canonical_format
    assert C[0, 1] == 3.0
    with pytest.raises(ValueError):
        as_csr(sps.csr_matrix(np.ones((2, 3))))


def test_matvec_against_dense(rng):
    D = rng.normal(size=(10, 10))
    D[np.abs(D) < 0.8] = 0.0
    v = rng.normal(size=10)
    A = sps.csr_matrix(D)
    np.testing.assert_allclose(matvec(A, v), D @ v, rtol=1e-14)
    np.testing.assert_allclose(transpose_matvec(A, v), D.T @ v, rtol=1e-14)
    assert np.all(matvec(A, np.zeros(10)) == 0)


def test_equilibration_unit_maxima(rng):
    A = sps.csr_matrix(rng.normal(size=(6, 6)) * np.logspace(-20, 3, 6)[:, None])
    r, c = equilibrate(A)
    S = abs(sps.diags(r) @ A @ sps.diags(c)).toarray()
    np.testing.assert_allclose(S.max(axis=1), 1.0, atol=1e-15)
    np.testing.assert_allclose(S.max(axis=0), 1.0, atol=1e-15)
    with pytest.raises(LinearSolveError, match="empty row"):
        equilibrate(sps.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]])))


def test_rows_twenty_orders_apart(rng):
    # the dry-cell situation: some equations carry a factor 1e-20
    n = 40
    D = rng.normal(size=(n, n)) + n * np.eye(n)
    scale = np.where(np.arange(n) % 3 == 0, 1e-20, 1.0)
    A = sps.csr_matrix(scale[:, None] * D)
    x_true = rng.normal(size=n)
    x = solve(A, A @ x_true)
    np.testing.assert_allclose(x, x_true, rtol=1e-10)
