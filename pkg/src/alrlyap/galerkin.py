"""Galerkin projection bookkeeping and diagnostics.

A :class:`ProjectionState` holds an orthonormal basis ``U`` of the search
space together with the projected quantities ``B = U^T A U`` and
``c0 = U^T y0``.  ``A U`` is cached column by column so that residuals cost
``O(n r^2)`` and never touch ``n x n`` matrices.

The diagnostics evaluate the trajectory functional

    F(U) = int_0^inf ||y(t) - U exp(B t) c0||^2 dt,   y(t) = exp(A t) y0,

through its algebraic form ``F(U) = tr X + tr Z - 2 tr U^T P`` where ``Z``
solves the projected Lyapunov equation and ``P`` the cross Sylvester
equation ``A P + P B^T = -y0 c0^T``.  Only ``tr X`` needs the full solution,
so it is kept separate.
"""
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp

from .dense import check_stable, gram_schmidt_extend, real_schur, schur_blocks, solve_small_lyapunov
from .errors import UnstableProjection
from .oracle import kron_sum_inverse_norm
from .sparse import ShiftedFactorCache

__all__ = [
    "ProjectionState",
    "FunctionalValue",
    "extend_state",
    "residual_norm",
    "solve_projected_sylvester",
    "cross_term",
    "functional_value",
    "reduced_functional",
    "functional_gradient",
    "bound_constant",
    "error_gramian",
]


class ProjectionState:
    """Orthonormal basis ``U`` with ``B = U^T A U``, ``c0 = U^T y0`` and ``A U``.

    Build one with :meth:`initial` (``U = y0/||y0||``) or :meth:`from_basis`.
    ``Z`` (the small Gramian) is solved lazily and invalidated on extension.
    """

    def __init__(self, U, AU, B, c0, y0, require_stable=True):
        self.require_stable = require_stable
        self.U = U
        self.AU = AU
        self.B = B
        self.c0 = c0
        self.y0 = y0
        self._Z = None
        self._schur = None

    @classmethod
    def initial(cls, A, y0, require_stable=True):
        y0 = np.asarray(y0, dtype=float).ravel()
        nrm = np.linalg.norm(y0)
        if nrm == 0.0:
            raise ValueError("y0 must be nonzero")
        u = (y0 / nrm)[:, None]
        AU = np.asarray(A @ u).reshape(-1, 1)
        return cls(u, AU, u.T @ AU, np.array([nrm]), y0, require_stable=require_stable)

    @classmethod
    def from_basis(cls, A, y0, U, require_stable=True):
        """State for an arbitrary orthonormal ``U`` (no check that ``y0`` is in its span)."""
        y0 = np.asarray(y0, dtype=float).ravel()
        U = np.asarray(U, dtype=float)
        AU = np.asarray(A @ U)
        return cls(U, AU, U.T @ AU, U.T @ y0, y0, require_stable=require_stable)

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def rank(self):
        return self.U.shape[1]

    @property
    def schur(self):
        if self._schur is None:
            self._schur = real_schur(self.B)
        return self._schur

    @property
    def Z(self):
        """Solution of ``B Z + Z B^T = -c0 c0^T``."""
        if self._Z is None:
            self._Z = solve_small_lyapunov(
                self.B, np.outer(self.c0, self.c0), schur=self.schur, require_stable=self.require_stable
            )
        return self._Z

    def residual_factor(self):
        """``A U - U B``, the projected-out part of ``A U``."""
        return self.AU - self.U @ self.B

    def extend(self, A, vectors, drop_tol=1e-10):
        """Orthonormalize ``vectors`` against ``U`` and append them; return the count added."""
        r = self.rank
        U, accepted = gram_schmidt_extend(self.U, vectors, drop_tol=drop_tol)
        if accepted == 0:
            return 0
        V = U[:, r:]
        AV = np.asarray(A @ V).reshape(self.n, accepted)
        B = np.empty((r + accepted, r + accepted))
        B[:r, :r] = self.B
        B[:r, r:] = self.U.T @ AV
        B[r:, :r] = V.T @ self.AU
        B[r:, r:] = V.T @ AV
        self.U = U
        self.AU = np.column_stack([self.AU, AV])
        self.B = B
        self.c0 = np.concatenate([self.c0, V.T @ self.y0])
        self._Z = None
        self._schur = None
        return accepted


def extend_state(state, A, new_vectors, drop_tol=1e-10):
    """Extend ``state`` in place; returns ``(state, accepted)``."""
    accepted = state.extend(A, new_vectors, drop_tol=drop_tol)
    return state, accepted


def residual_norm(state, A=None):
    """Lyapunov residual ``sqrt(2) ||(A U - U B) Z||_F`` of ``U Z U^T``.

    Valid when ``y0`` lies in the span of ``U``.  Uses the cached ``A U``.
    """
    return float(np.sqrt(2.0) * np.linalg.norm(state.residual_factor() @ state.Z))


def _cache_for(A, cache, transpose_A):
    if cache is None:
        cache = ShiftedFactorCache(A)
    return cache.transposed() if transpose_A else cache


def solve_projected_sylvester(A, B, G, cache=None, transpose_A=False, require_stable=True):
    """Solve ``op(A) P + P B^T = -G`` with ``op(A) = A`` or ``A^T``.

    The real Schur form ``B = Q T Q^T`` turns the equation into one shifted
    sparse solve per 1x1 diagonal block of ``T`` (shift ``T[j, j]``) and one
    coupled ``2n x 2n`` real solve per 2x2 block, swept from the last block.

    Parameters
    ----------
    A : sparse matrix, shape (n, n)
    B : ndarray, shape (r, r)
        Stable projected matrix.
    G : ndarray, shape (n, r)
    cache : ShiftedFactorCache, optional
        Factorizations of ``A + s I``; the transposed sibling is used when
        ``transpose_A`` is set.
    require_stable : bool
        If false, skip the stability check on ``B``; singular shifted systems
        still raise :class:`~alrlyap.errors.SingularShift`.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    G = np.asarray(G, dtype=float)
    if G.ndim == 1:
        G = G[:, None]
    r = B.shape[0]
    if G.shape[1] != r or G.shape[0] != A.shape[0]:
        raise ValueError(f"G has shape {G.shape}, expected ({A.shape[0]}, {r})")
    cache = _cache_for(A, cache, transpose_A)

    schur = real_schur(B)
    if require_stable:
        check_stable(schur)
    Q, T = schur.q, schur.t
    Gt = G @ Q
    Pt = np.zeros_like(Gt)
    for j, k in reversed(schur_blocks(T)):
        J = slice(j, j + k)
        rhs = -Gt[:, J] - Pt[:, j + k:] @ T[J, j + k:].T
        if k == 1:
            Pt[:, j] = cache.solve(T[j, j], rhs[:, 0])
        else:
            Pt[:, J] = cache.solve_block(T[J, J], rhs)
    return Pt @ Q.T


class FunctionalValue(NamedTuple):
    """Pieces of ``F(U) = F1 - 2 F2``; ``F = tr X + F_reduced``."""

    F1: Optional[float]
    F2: float
    F_reduced: float

    @property
    def F(self):
        if self.F1 is None:
            return None
        return self.F1 - 2.0 * self.F2


def cross_term(state, A, cache=None):
    """``P`` solving ``A P + P B^T = -y0 c0^T``."""
    return solve_projected_sylvester(A, state.B, np.outer(state.y0, state.c0), cache)


def _trace_cross(U, P):
    # tr U^T P without forming U^T P
    return float(np.einsum("ij,ij->", U, P))


def functional_value(state, A, cache=None, trace_X=None):
    """Evaluate ``F2 = tr U^T (P - U Z)`` and ``F_reduced = tr Z - 2 tr U^T P``.

    ``F(U) = tr X + F_reduced``; ``F1 = tr X - tr Z`` is only returned when
    ``trace_X`` is supplied.
    """
    P = cross_term(state, A, cache)
    Z = state.Z
    trZ = float(np.trace(Z))
    # U^T U = I, so tr U^T U Z = tr Z
    trUP = _trace_cross(state.U, P)
    F2 = trUP - trZ
    F1 = None if trace_X is None else float(trace_X) - trZ
    return FunctionalValue(F1=F1, F2=F2, F_reduced=trZ - 2.0 * trUP)


def reduced_functional(A, y0, U, cache=None):
    """``tr Z - 2 tr U^T P`` for an arbitrary (not necessarily orthonormal) ``U``.

    Together with the constant ``tr X`` this is ``F(U)``.
    """
    y0 = np.asarray(y0, dtype=float).ravel()
    AU = np.asarray(A @ U)
    B = U.T @ AU
    c0 = U.T @ y0
    Z = solve_small_lyapunov(B, np.outer(c0, c0))
    P = solve_projected_sylvester(A, B, np.outer(y0, c0), cache)
    return float(np.trace(Z)) - 2.0 * _trace_cross(U, P)


def functional_gradient(state, A, cache=None):
    """Euclidean gradient of ``F`` with respect to ``U`` (an ``n x r`` array).

    ``-2P + 2 y0 (c0^T Z_I - y0^T P_U) + 2 A U (Z Z_I - P^T P_U)
    + 2 A^T U (Z_I Z - P_U^T P)`` with ``A^T P_U + P_U B = -U`` and
    ``B^T Z_I + Z_I B = -I``.
    """
    U, B, c0, y0 = state.U, state.B, state.c0, state.y0
    if cache is None:
        cache = ShiftedFactorCache(A)
    Z = state.Z
    P = cross_term(state, A, cache)
    P_U = solve_projected_sylvester(A, B.T, U, cache, transpose_A=True)
    Z_I = solve_small_lyapunov(B.T, np.eye(state.rank))
    AtU = np.asarray(A.T @ U)
    return (
        -2.0 * P
        + 2.0 * np.outer(y0, c0 @ Z_I - y0 @ P_U)
        + 2.0 * state.AU @ (Z @ Z_I - P.T @ P_U)
        + 2.0 * AtU @ (Z_I @ Z - P_U.T @ P)
    )


def bound_constant(A_dense, B):
    """Constant ``C`` with ``F(U) <= C * R1(U)``.

    ``C = ||(I kron A + A kron I)^{-1}||_F + sqrt(2 r) ||(I kron A + B kron I)^{-1}||_F``,
    formed from explicit dense inverses (small ``n`` only).
    """
    A_dense = A_dense.toarray() if sp.issparse(A_dense) else np.atleast_2d(np.asarray(A_dense, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    for M, what in ((A_dense, "A"), (B, "B")):
        eigs = np.linalg.eigvals(M)
        if np.max(eigs.real) >= 0.0:
            raise UnstableProjection(f"{what} is not stable", eigenvalues=eigs)
    r = B.shape[0]
    return kron_sum_inverse_norm(A_dense, A_dense) + np.sqrt(2.0 * r) * kron_sum_inverse_norm(A_dense, B)


def error_gramian(X, P, U, Z):
    """``X - P U^T - U P^T + U Z U^T``: the Gramian of ``y(t) - U exp(Bt) c0``."""
    PUt = P @ U.T
    return X - PUt - PUt.T + U @ Z @ U.T
