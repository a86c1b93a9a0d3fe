"""Brute-force reference solutions for tests and verification runs.

The code paths here deliberately avoid :mod:`alrlyap.dense`: small problems
are vectorized and solved as one Kronecker system by dense LU with partial
pivoting.  Kronecker systems beyond ``KRON_MAX`` unknowns do not fit in memory
at desk scale, so larger problems use a spectral formula (symmetric ``A``) or
LAPACK's Bartels-Stewart driver.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sp

__all__ = [
    "DenseSolution",
    "dense_lyapunov",
    "dense_sylvester",
    "lyapunov_residual",
    "kron_sum_inverse_norm",
    "KRON_MAX",
]

KRON_MAX = 4096


def _dense(A):
    if sp.issparse(A):
        return A.toarray()
    return np.atleast_2d(np.asarray(A, dtype=float))


@dataclass(frozen=True)
class DenseSolution:
    """Full solution ``X`` of ``A X + X A^T = -y0 y0^T``."""

    X: np.ndarray

    @property
    def trace(self):
        return float(np.trace(self.X))


def dense_lyapunov(A, y0):
    """Solve ``A X + X A^T = -y0 y0^T`` densely.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the Kronecker system is singular (``A`` not stable).
    """
    A = _dense(A)
    y0 = np.asarray(y0, dtype=float).ravel()
    n = A.shape[0]
    C = np.outer(y0, y0)
    if n * n <= KRON_MAX:
        I = np.eye(n)
        K = np.kron(I, A) + np.kron(A, I)
        X = np.linalg.solve(K, -C.ravel(order="F")).reshape(n, n, order="F")
    elif np.array_equal(A, A.T):
        lam, V = np.linalg.eigh(A)
        denom = lam[:, None] + lam[None, :]
        if np.any(denom == 0.0):
            raise np.linalg.LinAlgError("singular Lyapunov operator")
        Ct = V.T @ C @ V
        X = V @ (-Ct / denom) @ V.T
    else:
        X = spla.solve_continuous_lyapunov(A, -C)
    return DenseSolution(X=0.5 * (X + X.T))


def dense_sylvester(A, B, G):
    """Solve ``A P + P B^T = -G`` densely."""
    A = _dense(A)
    B = _dense(B)
    G = np.asarray(G, dtype=float)
    if G.ndim == 1:
        G = G[:, None]
    n, r = A.shape[0], B.shape[0]
    if G.shape != (n, r):
        raise ValueError(f"G has shape {G.shape}, expected {(n, r)}")
    if n * r <= KRON_MAX:
        K = np.kron(np.eye(r), A) + np.kron(B, np.eye(n))
        return np.linalg.solve(K, -G.ravel(order="F")).reshape(n, r, order="F")
    return spla.solve_sylvester(A, B.T, -G)


def lyapunov_residual(A, X, y0):
    """Frobenius norm of ``A X + X A^T + y0 y0^T``."""
    y0 = np.asarray(y0, dtype=float).ravel()
    R = A @ X + (A @ X.T).T + np.outer(y0, y0)
    return float(np.linalg.norm(R))


def kron_sum_inverse_norm(A, B):
    """``||(I kron A + B kron I)^{-1}||_F`` with an explicit dense inverse."""
    A = _dense(A)
    B = _dense(B)
    K = np.kron(np.eye(B.shape[0]), A) + np.kron(B, np.eye(A.shape[0]))
    return float(np.linalg.norm(np.linalg.inv(K)))
