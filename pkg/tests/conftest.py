"""Shared helpers: independent reference routines and random test states."""
import numpy as np
import pytest
import scipy.sparse as sp

from alrlyap.galerkin import ProjectionState


def jacobi_eigenvalues(S, tol=1e-15, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    S = np.array(S, dtype=float)
    n = S.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(S, -1) ** 2))
        if off <= tol * max(np.linalg.norm(S), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if S[p, q] == 0.0:
                    continue
                theta = (S[q, q] - S[p, p]) / (2.0 * S[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                S = J.T @ S @ J
    return np.sort(np.diag(S))


def dense_convdiff(nx, dims, cx=10.0, cy=1000.0, cz=1.0):
    """Loop-based central-difference assembler, written without Kronecker products."""
    h = 1.0 / (nx + 1)
    coef = [cx, cy, cz][:dims]
    n = nx**dims
    A = np.zeros((n, n))

    def index(idx):
        return sum(i * nx**k for k, i in enumerate(idx))

    for flat in range(n):
        idx = [(flat // nx**k) % nx for k in range(dims)]
        row = index(idx)
        A[row, row] = -2.0 * dims / h**2
        for axis in range(dims):
            # velocity: cx*x, cy*y, constant cz
            pos = (idx[axis] + 1) * h
            vel = coef[axis] * (pos if axis < 2 else 1.0)
            for step in (-1, 1):
                nb = list(idx)
                nb[axis] += step
                if 0 <= nb[axis] < nx:
                    A[row, index(nb)] += 1.0 / h**2 - step * vel / (2.0 * h)
    return A


def random_valid_basis(rng, y0, r):
    """Orthonormal ``n x r`` basis whose span contains ``y0``."""
    n = y0.shape[0]
    M = np.column_stack([y0, rng.standard_normal((n, r - 1))])
    Q, _ = np.linalg.qr(M)
    return Q


def random_valid_state(rng, A, y0, r, require_stable_B=True, max_tries=200):
    """Random :class:`ProjectionState` with ``y0`` in span ``U``; rejection-samples stable ``B``."""
    for _ in range(max_tries):
        U = random_valid_basis(rng, y0, r)
        state = ProjectionState.from_basis(A, y0, U)
        if not require_stable_B or np.max(np.linalg.eigvals(state.B).real) < 0:
            return state
    raise RuntimeError("no stable projection found")


def random_stable(rng, r):
    """Random non-symmetric stable matrix."""
    M = rng.standard_normal((r, r))
    shift = np.max(np.linalg.eigvals(M).real) + rng.uniform(0.1, 2.0)
    return M - shift * np.eye(r)


def minus_identity(n):
    return sp.csr_array(-sp.identity(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)
