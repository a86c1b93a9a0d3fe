import numpy as np
import pytest

from alrlyap.dense import solve_small_lyapunov
from alrlyap.galerkin import functional_value
from alrlyap.oracle import dense_lyapunov, dense_sylvester, lyapunov_residual
from alrlyap.problems import convdiff2d, laplace2d
from conftest import random_stable, random_valid_state


def test_lyapunov_scalar():
    np.testing.assert_allclose(dense_lyapunov(np.array([[-1.0]]), np.array([1.0])).X, [[0.5]])


def test_lyapunov_diagonal():
    X = dense_lyapunov(np.diag([-1.0, -2.0]), np.ones(2)).X
    np.testing.assert_allclose(X, [[1 / 2, 1 / 3], [1 / 3, 1 / 4]], rtol=1e-14)


def test_lyapunov_laplace_psd():
    A = laplace2d(6)
    y0 = np.ones(36)
    sol = dense_lyapunov(A, y0)
    assert np.array_equal(sol.X, sol.X.T)
    lam = np.linalg.eigvalsh(sol.X)
    assert lam.min() >= -1e-10 * lam.max()
    assert sol.trace > 0
    assert lyapunov_residual(A, sol.X, y0) <= 1e-9 * (y0 @ y0)


@pytest.mark.parametrize("A", [laplace2d(12), convdiff2d(9)], ids=["symmetric", "nonsymmetric"])
def test_lyapunov_large_paths(A, rng):
    # n^2 above the Kronecker limit switches to the spectral / Schur routes
    y0 = rng.standard_normal(A.shape[0])
    X = dense_lyapunov(A, y0).X
    assert lyapunov_residual(A, X, y0) <= 1e-9 * (y0 @ y0)


def test_lyapunov_unstable_raises():
    with pytest.raises(np.linalg.LinAlgError):
        dense_lyapunov(np.diag([-1.0, 1.0]), np.ones(2))


def test_sylvester_examples():
    np.testing.assert_allclose(dense_sylvester(np.array([[-1.0]]), np.array([[-2.0]]), np.array([[1.0]])), [[1 / 3]])
    assert np.array_equal(dense_sylvester(-np.eye(3), -np.eye(2), np.zeros((3, 2))), np.zeros((3, 2)))


def test_sylvester_random_residual(rng):
    A, B = random_stable(rng, 8), random_stable(rng, 3)
    G = rng.standard_normal((8, 3))
    P = dense_sylvester(A, B, G)
    assert np.linalg.norm(A @ P + P @ B.T + G) <= 1e-9 * max(1.0, np.linalg.norm(G))


def test_sylvester_shape_check():
    with pytest.raises(ValueError):
        dense_sylvester(-np.eye(3), -np.eye(2), np.ones((3, 3)))


def test_agrees_with_small_lyapunov(rng):
    for _ in range(10):
        r = int(rng.integers(1, 13))
        B = random_stable(rng, r)
        c = rng.standard_normal(r)
        X = dense_lyapunov(B, c).X
        Z = solve_small_lyapunov(B, np.outer(c, c))
        assert np.linalg.norm(X - Z) <= 1e-10 * np.linalg.norm(X)


def test_trace_identity(rng):
    A = laplace2d(6)
    y0 = rng.standard_normal(36)
    trX = dense_lyapunov(A, y0).trace
    for r in (1, 3, 6):
        state = random_valid_state(rng, A, y0, r)
        fv = functional_value(state, A, trace_X=trX)
        assert fv.F1 + np.trace(state.Z) == pytest.approx(trX, abs=1e-9 * max(1.0, trX))
