"""Sparse operator storage and shifted solves ``(A + s I) v = w``.

Operators are kept as canonical ``scipy.sparse.csr_array`` objects (sorted,
duplicate-free column indices).  Shifted systems are factorized with SuperLU
and cached per shift; the fill-reducing ordering is computed once from the
pattern of ``A`` because the pattern of ``A + s I`` does not depend on ``s``.
"""
import time

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import SingularShift

__all__ = [
    "ShiftedFactorCache",
    "as_csr",
    "matvec",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]

PIVOT_TOL = 1e-14


def as_csr(A):
    """Return ``A`` as a canonical, square ``csr_array`` of floats."""
    A = sp.csr_array(A, dtype=float)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be square, got shape {A.shape}")
    A.sum_duplicates()
    A.sort_indices()
    if not np.all(np.isfinite(A.data)):
        raise ValueError("operator has non-finite entries")
    return A


def matvec(A, x):
    """``A @ x`` for a CSR operator; ``x`` may be a vector or a block of columns."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: operator is {A.shape}, vector has {x.shape[0]} rows")
    return A @ x


def _shift_key(s):
    # bitwise comparison of shifts: 0.0 and -0.0 are distinct keys
    return np.float64(s).tobytes()


class ShiftedFactorCache:
    """Factorizations of ``A + s I`` keyed by the shift ``s``.

    Also stores factorizations of the coupled ``2n x 2n`` systems that arise
    from 2x2 blocks of a real Schur form (see :meth:`solve_block`).

    Parameters
    ----------
    A : sparse matrix
        Square operator.
    verify : bool
        If true, every solve re-multiplies and records the relative residual
        in :attr:`max_residual`.
    """

    def __init__(self, A, verify=False):
        self.A = as_csr(A)
        self.n = self.A.shape[0]
        self.verify = verify
        self.norm = float(abs(self.A).sum(axis=1).max()) if self.A.nnz else 0.0
        pattern = (self.A + self.A.T + sp.identity(self.n, format="csr")).tocsr()
        self._perm = reverse_cuthill_mckee(pattern, symmetric_mode=True).astype(np.int64)
        self._iperm = np.argsort(self._perm)
        self._Ap = self.A[self._perm][:, self._perm].tocsc()
        self._factors = {}
        self._transpose = None
        self.factorizations = 0
        self.hits = 0
        self.solves = 0
        self.factorize_seconds = 0.0
        self.solve_seconds = 0.0
        self.max_residual = 0.0

    def __len__(self):
        return len(self._factors)

    def __contains__(self, s):
        return _shift_key(s) in self._factors

    @property
    def shifts(self):
        """Real shifts with a cached factorization, in insertion order."""
        return [np.frombuffer(k, dtype=np.float64)[0] for k in self._factors if isinstance(k, bytes)]

    def transposed(self):
        """Cache for ``A^T``, created on first use and kept for reuse."""
        if self._transpose is None:
            self._transpose = ShiftedFactorCache(self.A.T, verify=self.verify)
        return self._transpose

    def _lu(self, M, key, shift):
        t0 = time.perf_counter()
        try:
            lu = spla.splu(M, permc_spec="NATURAL")
        except RuntimeError as exc:
            raise SingularShift(f"A + sI is singular for s={shift!r}: {exc}", shift=shift) from exc
        pivots = np.abs(lu.U.diagonal())
        if pivots.size and pivots.min() <= PIVOT_TOL * max(self.norm, 1.0):
            raise SingularShift(f"A + sI is numerically singular for s={shift!r}", shift=shift)
        self.factorize_seconds += time.perf_counter() - t0
        self.factorizations += 1
        self._factors[key] = lu
        return lu

    def factorize(self, s):
        """Return the (cached) factorization handle of ``A + s I``."""
        s = float(s)
        key = _shift_key(s)
        lu = self._factors.get(key)
        if lu is not None:
            self.hits += 1
            return lu
        M = (self._Ap + s * sp.identity(self.n, format="csc")).tocsc()
        return self._lu(M, key, s)

    def solve(self, s, w):
        """Solve ``(A + s I) v = w``; ``w`` may hold several columns."""
        w = np.asarray(w, dtype=float)
        if w.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: operator is {self.n}, rhs has {w.shape[0]} rows")
        lu = self.factorize(s)
        t0 = time.perf_counter()
        v = lu.solve(np.ascontiguousarray(w[self._perm]))[self._iperm]
        self.solve_seconds += time.perf_counter() - t0
        self.solves += 1
        if self.verify:
            self._record_residual(self.A @ v + float(s) * v, w)
        return v

    def _block_matrix(self, T2):
        n = self.n
        I = sp.identity(n, format="csc")
        M = sp.bmat(
            [[self._Ap + T2[0, 0] * I, T2[0, 1] * I], [T2[1, 0] * I, self._Ap + T2[1, 1] * I]],
            format="csc",
        )
        # interleave the two copies so the band structure of the ordering survives
        order = np.empty(2 * n, dtype=np.int64)
        order[0::2] = np.arange(n)
        order[1::2] = np.arange(n) + n
        return M[order][:, order].tocsc(), order

    def solve_block(self, T2, W):
        """Solve the coupled system ``A V + V T2^T = W`` for ``V`` of shape ``(n, 2)``.

        Column-wise this is ``(A + T2[i, i] I) v_i + T2[i, j] v_j = w_i``,
        i.e. the real form of a shifted solve with a complex-conjugate pair of
        shifts.
        """
        T2 = np.asarray(T2, dtype=float)
        W = np.asarray(W, dtype=float)
        key = ("block",) + tuple(np.float64(x).tobytes() for x in T2.ravel())
        entry = self._factors.get(key)
        if entry is None:
            M, order = self._block_matrix(T2)
            lu = self._lu(M, key, tuple(T2.ravel()))
            entry = self._factors[key] = (lu, order)
        else:
            self.hits += 1
        lu, order = entry
        n = self.n
        t0 = time.perf_counter()
        rhs = np.concatenate([W[self._perm, 0], W[self._perm, 1]])[order]
        sol = np.empty(2 * n)
        sol[order] = lu.solve(rhs)
        V = np.column_stack([sol[:n][self._iperm], sol[n:][self._iperm]])
        self.solve_seconds += time.perf_counter() - t0
        self.solves += 1
        if self.verify:
            self._record_residual(self.A @ V + V @ T2.T, W)
        return V

    def _record_residual(self, AV, W):
        nw = np.linalg.norm(W)
        if nw > 0:
            self.max_residual = max(self.max_residual, np.linalg.norm(AV - W) / nw)


def read_matrix_market(path):
    """Read a coordinate real Matrix Market file into a canonical CSR operator."""
    return as_csr(scipy.io.mmread(path))


def write_matrix_market(path, A):
    scipy.io.mmwrite(path, sp.coo_matrix(A), field="real", precision=17)


def read_vector(path):
    """Read a plain-text vector, one value per line."""
    return np.loadtxt(path, dtype=float, ndmin=1)


def write_vector(path, x):
    np.savetxt(path, np.asarray(x, dtype=float).ravel(), fmt="%.17g")
