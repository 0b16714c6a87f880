import numpy as np
import pytest
import scipy.sparse as sp

from conjfun.solverlib import IndefiniteMatrixError, SolverStats, factor, multi_solve, schur_reduced


def dense_L(F):
    L, perm = F.cholesky()
    return L.toarray(), perm


def test_one_by_one():
    L, _ = dense_L(factor(sp.csc_matrix([[2.0]])))
    np.testing.assert_allclose(L, [[np.sqrt(2)]], rtol=1e-15)


def test_two_by_two_by_hand():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    L, perm = dense_L(factor(sp.csc_matrix(A)))
    P = A[perm][:, perm]
    # hand Cholesky of the permuted matrix (both orders give the same numbers here)
    expect = np.array([[np.sqrt(2), 0.0], [1 / np.sqrt(2), np.sqrt(1.5)]])
    np.testing.assert_allclose(L, expect, rtol=1e-15)
    np.testing.assert_allclose(L @ L.T, P, rtol=1e-15)


def test_identity():
    L, _ = dense_L(factor(sp.identity(5, format="csc")))
    np.testing.assert_array_equal(L, np.eye(5))
    b = np.arange(5.0)
    np.testing.assert_array_equal(multi_solve(factor(sp.identity(5)), b), b)


def test_indefinite_reports_pivot():
    with pytest.raises(IndefiniteMatrixError) as err:
        factor(sp.csc_matrix([[1.0, 2.0], [2.0, 1.0]]))
    assert err.value.pivot is not None
    with pytest.raises(IndefiniteMatrixError):
        factor(sp.csc_matrix([[1.0, 0.0], [0.0, 0.0]]))


def random_spd(n, seed=0, density=0.1):
    rng = np.random.default_rng(seed)
    B = sp.random(n, n, density=density, random_state=rng)
    return sp.csc_matrix(B @ B.T + n * sp.identity(n))


def test_round_trip_and_residual():
    A = random_spd(50)
    stats = SolverStats()
    F = factor(A, stats=stats)
    B = np.random.default_rng(1).standard_normal((50, 4))
    X = multi_solve(F, B, stats)
    res = np.linalg.norm(A @ X - B, axis=0) / np.linalg.norm(B, axis=0)
    assert np.all(res <= 1e-13)
    L, perm = F.cholesky()
    np.testing.assert_allclose((L @ L.T).toarray(), A.toarray()[perm][:, perm], atol=1e-12)
    assert stats.factorizations == 1 and stats.solves == 4
    np.testing.assert_array_equal(multi_solve(F, np.zeros(50)), np.zeros(50))


def test_dimension_mismatch():
    F = factor(random_spd(10))
    with pytest.raises(ValueError):
        multi_solve(F, np.ones(9))


def test_schur_energy_agreement():
    A = random_spd(40, 3, 0.2).toarray()
    I, D = np.arange(30), np.arange(30, 40)
    R = np.zeros((10, 3))
    R[:4, 0] = R[4:7, 1] = R[7:, 2] = 1
    S, K0, K1 = schur_reduced(sp.csc_matrix(A[np.ix_(I, I)]), A[np.ix_(I, D)], A[np.ix_(D, D)], R)
    assert np.abs(S - S.T).max() <= 1e-12
    rng = np.random.default_rng(4)
    for _ in range(5):
        y = rng.standard_normal(3)
        xD = R @ y
        xI = np.linalg.solve(A[np.ix_(I, I)], -A[np.ix_(I, D)] @ xD)
        x = np.concatenate([xI, xD])
        assert y @ S @ y == pytest.approx(x @ A @ x, rel=1e-10)


def test_schur_without_holes_is_scalar():
    A = random_spd(8).toarray()
    S, _, _ = schur_reduced(sp.csc_matrix(A[:6, :6]), A[:6, 6:], A[6:, 6:], np.ones((2, 1)))
    assert S.shape == (1, 1)
