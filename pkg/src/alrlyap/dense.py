"""Small dense linear algebra used on projected (r x r) problems.

Everything here operates on plain ``numpy`` arrays.  The matrices involved
are small (a few hundred rows at most), so clarity wins over blocking.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import UnstableProjection

__all__ = [
    "SchurForm",
    "gram_schmidt_extend",
    "real_schur",
    "schur_blocks",
    "schur_eigenvalues",
    "solve_small_lyapunov",
    "singular_values",
]

SOLVABILITY_TOL = 1e-12


def gram_schmidt_extend(U, candidates, drop_tol=1e-10):
    """Append ``candidates`` to the orthonormal basis ``U``.

    Each candidate is orthogonalized twice (classical Gram-Schmidt with one
    full re-orthogonalization pass) against ``U`` and against the candidates
    accepted before it.  A candidate whose remaining norm is at most
    ``drop_tol`` times its original norm is dropped.

    Parameters
    ----------
    U : ndarray, shape (n, r) or None
        Orthonormal columns; ``None`` or an ``(n, 0)`` array means empty.
    candidates : ndarray, shape (n,) or (n, k)
        Vectors to add, in order.
    drop_tol : float
        Relative deflation threshold.

    Returns
    -------
    U_ext : ndarray, shape (n, r + accepted)
        ``U`` with the accepted, normalized candidates appended.  The leading
        ``r`` columns are ``U`` unchanged.
    accepted : int
        Number of candidates that survived deflation.
    """
    cand = np.asarray(candidates, dtype=float)
    if cand.ndim == 1:
        cand = cand[:, None]
    n = cand.shape[0]
    if U is None:
        U = np.zeros((n, 0))
    U = np.asarray(U, dtype=float)
    if U.shape[0] != n:
        raise ValueError(f"dimension mismatch: basis has {U.shape[0]} rows, candidates have {n}")

    basis = U
    accepted = 0
    for j in range(cand.shape[1]):
        x = cand[:, j].copy()
        nrm0 = np.linalg.norm(x)
        if nrm0 == 0.0:
            continue
        for _ in range(2):
            x -= basis @ (basis.T @ x)
        nrm = np.linalg.norm(x)
        if nrm <= drop_tol * nrm0:
            continue
        x /= nrm
        basis = np.column_stack([basis, x])
        accepted += 1
    if accepted == 0:
        return U.copy(), 0
    return basis, accepted


@dataclass(frozen=True)
class SchurForm:
    """Real Schur factorization ``M = q @ t @ q.T``."""

    q: np.ndarray
    t: np.ndarray

    @property
    def blocks(self):
        return schur_blocks(self.t)

    @property
    def eigenvalues(self):
        return schur_eigenvalues(self.t)


def real_schur(M):
    """Real Schur decomposition of a square matrix.

    Backed by LAPACK (Hessenberg reduction plus Francis double-shift QR).
    Diagonal blocks are 1x1 for real eigenvalues and 2x2 in standardized
    form for complex-conjugate pairs.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        t, q = spla.schur(M, output="real")
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"Schur iteration did not converge: {exc}") from exc
    return SchurForm(q=q, t=t)


def schur_blocks(t):
    """Return ``(start, size)`` for each diagonal block of quasi-triangular ``t``."""
    n = t.shape[0]
    blocks = []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            blocks.append((i, 2))
            i += 2
        else:
            blocks.append((i, 1))
            i += 1
    return blocks


def schur_eigenvalues(t):
    """Eigenvalues read off the diagonal blocks of a quasi-triangular matrix."""
    eigs = []
    for i, k in schur_blocks(t):
        if k == 1:
            eigs.append(complex(t[i, i]))
        else:
            eigs.extend(np.linalg.eigvals(t[i:i + 2, i:i + 2]))
    return np.asarray(eigs, dtype=complex)


def check_stable(schur, what="projected matrix", require_stable=True):
    """Raise :class:`UnstableProjection` unless the Schur eigenvalues allow a solve.

    With ``require_stable`` every eigenvalue must have negative real part.
    Otherwise only solvability of the Lyapunov operator is required: no pair
    of eigenvalues may (numerically) sum to zero.
    """
    eigs = schur.eigenvalues
    if not require_stable:
        if eigs.size:
            gap = np.min(np.abs(eigs[:, None] + eigs[None, :]))
            if gap <= SOLVABILITY_TOL * max(np.max(np.abs(eigs)), np.finfo(float).tiny):
                raise UnstableProjection(
                    f"{what} has eigenvalues summing to {gap:.3e}; Lyapunov operator is singular",
                    eigenvalues=eigs,
                )
        return eigs
    if eigs.size and np.max(eigs.real) >= 0.0:
        raise UnstableProjection(
            f"{what} is not stable: max real part of eigenvalues is {np.max(eigs.real):.3e}",
            eigenvalues=eigs,
        )
    return eigs


def solve_small_lyapunov(B, C, schur=None, require_stable=True):
    """Solve ``B Z + Z B^T = -C`` by Bartels-Stewart.

    Parameters
    ----------
    B : ndarray, shape (r, r)
        Stable matrix.
    C : ndarray, shape (r, r)
        Symmetric right-hand side.
    schur : SchurForm, optional
        Precomputed real Schur form of ``B``.
    require_stable : bool
        If false, an unstable ``B`` is accepted as long as the equation is
        uniquely solvable (``Z`` is then symmetric but possibly indefinite).

    Returns
    -------
    Z : ndarray, shape (r, r)
        Symmetric solution.

    Raises
    ------
    UnstableProjection
        If ``B`` has an eigenvalue with non-negative real part (or, with
        ``require_stable=False``, if two eigenvalues sum to zero).
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    r = B.shape[0]
    if B.shape != (r, r) or C.shape != (r, r):
        raise ValueError(f"shape mismatch: B {B.shape}, C {C.shape}")
    if schur is None:
        schur = real_schur(B)
    check_stable(schur, require_stable=require_stable)
    Q, T = schur.q, schur.t

    Ct = Q.T @ C @ Q
    Y = np.zeros((r, r))
    eye = np.eye(r)
    # T Y_J + Y_J T_JJ^T = -C_J - sum_{K > J} Y_K T_JK^T, swept from the last block
    for j, k in reversed(schur_blocks(T)):
        J = slice(j, j + k)
        rhs = -Ct[:, J] - Y[:, j + k:] @ T[J, j + k:].T
        if k == 1:
            Y[:, j] = np.linalg.solve(T + T[j, j] * eye, rhs[:, 0])
        else:
            K = np.kron(np.eye(2), T) + np.kron(T[J, J], eye)
            Y[:, J] = np.linalg.solve(K, rhs.reshape(-1, order="F")).reshape(r, 2, order="F")
    Z = Q @ Y @ Q.T
    return 0.5 * (Z + Z.T)


def singular_values(M):
    """Singular values of ``M`` in descending order."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return np.linalg.svd(M, compute_uv=False)
