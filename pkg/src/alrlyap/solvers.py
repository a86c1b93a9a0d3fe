"""Projection solvers for ``A X + X A^T = -y0 y0^T`` with low-rank output.

Four methods share :class:`~alrlyap.galerkin.ProjectionState` and the trace
format:

``alr``
    Adaptive low-rank method.  Each step adds a rational Krylov vector
    ``(A + s I)^{-1} w`` and the Krylov vector ``w``, with the shift
    ``s = q^T B q`` taken from the normalized last row of the projected
    Gramian.
``doubling``
    Adds the whole solution of the correction Sylvester equation each step.
``kpik``
    Extended Krylov: one direct and one inverse Krylov vector per step.
``rksm`` / ``erksm``
    Rational Krylov with greedily chosen real shifts (a simplified variant of
    the adaptive pole selection); ``erksm`` also adds one Krylov vector.

All methods stop when the normalized residual
``||A X~ + X~ A^T + y0 y0^T||_F / ||y0||^2`` drops to ``eps``.  An
"iteration" is one basis enrichment step, so a converged ALR/KPIK run with
``k`` iterations has rank at most ``2k + 1`` and RKSM has rank ``k + 1``.
"""
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import SingularShift, UnstableProjection
from .galerkin import ProjectionState, solve_projected_sylvester
from .sparse import ShiftedFactorCache, as_csr

__all__ = [
    "METHODS",
    "SolverConfig",
    "IterationRecord",
    "SolverTrace",
    "LowRankSolution",
    "alr_solve",
    "doubling_solve",
    "kpik_solve",
    "rksm_solve",
    "solve",
]

METHODS = ("alr", "doubling", "kpik", "rksm", "erksm")

CONVERGED = "converged"
EXHAUSTED = "rank_budget_exhausted"
BREAKDOWN = "breakdown"
UNSTABLE = "unstable_projection"

BREAKDOWN_TOL = 1e-12
RKSM_GRID = 100


@dataclass(frozen=True)
class SolverConfig:
    method: str = "alr"
    eps: float = 1e-8
    r_max: int = 100
    rksm_shift_bounds: Optional[Tuple[float, float]] = None
    drop_tol: float = 1e-10

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")
        if self.rksm_shift_bounds is not None:
            a, b = self.rksm_shift_bounds
            if not 0 < a <= b:
                raise ValueError("rksm_shift_bounds must be positive with a <= b")


@dataclass
class IterationRecord:
    iteration: int
    rank: int
    delta: float
    residual: float
    shift: Optional[float] = None
    factorize_seconds: float = 0.0
    solve_seconds: float = 0.0


@dataclass
class SolverTrace:
    """Per-iteration history of a run plus its terminal status."""

    method: str
    records: List[IterationRecord] = field(default_factory=list)
    status: Optional[str] = None
    wall_seconds: float = 0.0
    message: str = ""

    @property
    def converged(self):
        return self.status == CONVERGED

    @property
    def iterations(self):
        return self.records[-1].iteration if self.records else 0

    @property
    def rank(self):
        return self.records[-1].rank if self.records else 0

    @property
    def residual(self):
        return self.records[-1].residual if self.records else np.inf

    @property
    def shifts(self):
        """Shifts in the order they were used (``[]`` for KPIK and doubling)."""
        return [rec.shift for rec in self.records if rec.shift is not None]

    @property
    def factorize_seconds(self):
        return sum(rec.factorize_seconds for rec in self.records)

    @property
    def solve_seconds(self):
        return sum(rec.solve_seconds for rec in self.records)


@dataclass
class LowRankSolution:
    """``X ~ U Z U^T`` with orthonormal ``U`` and symmetric PSD ``Z``."""

    U: np.ndarray
    Z: np.ndarray

    @property
    def rank(self):
        return self.U.shape[1]

    def to_dense(self):
        return self.U @ self.Z @ self.U.T

    @classmethod
    def from_state(cls, state):
        Z = state.Z
        lam, V = np.linalg.eigh(Z)
        tiny = (lam < 0) & (lam >= -1e-12 * max(np.abs(lam).max(), 0.0))
        if np.any(tiny):
            lam = np.where(tiny, 0.0, lam)
            Z = (V * lam) @ V.T
            Z = 0.5 * (Z + Z.T)
        return cls(U=state.U.copy(), Z=Z)


class _Run:
    """Shared bookkeeping for one solver run: timing, records and status."""

    def __init__(self, method, A, y0, config, cache):
        self.t0 = time.perf_counter()
        self.A = as_csr(A)
        self.y0 = np.asarray(y0, dtype=float).ravel()
        if self.y0.shape[0] != self.A.shape[0]:
            raise ValueError(f"y0 has length {self.y0.shape[0]}, operator is {self.A.shape}")
        self.config = config
        self.cache = cache if cache is not None else ShiftedFactorCache(self.A)
        self.scale = float(self.y0 @ self.y0)
        self.trace = SolverTrace(method=method)
        # intermediate projections of non-normal operators can be unstable;
        # only unique solvability of the projected equation is required
        self.state = ProjectionState.initial(self.A, self.y0, require_stable=False)
        self.solution = None
        self.iteration = 0
        self._fact = self.cache.factorize_seconds
        self._solve = self.cache.solve_seconds

    def gramian(self):
        """Solve the projected Lyapunov equation; ``None`` if the projection is unstable."""
        try:
            self.state.Z
        except UnstableProjection as exc:
            self.trace.message = str(exc)
            return None
        return self.state.Z

    def check(self, delta):
        """Record the residual for the current basis; returns the terminal status or ``None``."""
        res = np.sqrt(2.0) * delta / self.scale
        self.trace.records.append(
            IterationRecord(iteration=self.iteration, rank=self.state.rank, delta=delta, residual=res)
        )
        if res <= self.config.eps:
            return CONVERGED
        return None

    def budget_left(self, growth):
        return self.state.rank + growth <= self.config.r_max

    def stepped(self, shift=None):
        rec = self.trace.records[-1]
        rec.shift = None if shift is None else float(shift)
        rec.factorize_seconds = self.cache.factorize_seconds - self._fact
        rec.solve_seconds = self.cache.solve_seconds - self._solve
        self._fact = self.cache.factorize_seconds
        self._solve = self.cache.solve_seconds
        self.iteration += 1

    def finish(self, status):
        self.trace.status = status
        self.trace.wall_seconds = time.perf_counter() - self.t0
        if status == UNSTABLE:
            if self.solution is None:
                raise UnstableProjection(self.trace.message or "projected matrix lost stability")
            return self.solution, self.trace
        return LowRankSolution.from_state(self.state), self.trace

    def remember(self):
        # last solution with a stable projection, returned if a later step breaks it
        self.solution = LowRankSolution.from_state(self.state)


def _project_out(U, x):
    for _ in range(2):
        x = x - U @ (U.T @ x)
    return x


def _shifted_solve_guarded(cache, s, w):
    try:
        return s, cache.solve(s, w)
    except SingularShift:
        s = s * (1.0 + 1e-8) + 1e-12
        return s, cache.solve(s, w)


def alr_solve(A, y0, config=None, cache=None):
    """Adaptive low-rank (ALR) method.

    Starting from ``U = y0/||y0||``, each iteration forms the Krylov vector
    ``w = (I - U U^T) A u_last``, solves the projected Lyapunov equation,
    and, unless ``sqrt(2) ||w|| ||z|| / ||y0||^2 <= eps`` with ``z`` the last
    row of ``Z``, appends ``v = (A + s I)^{-1} w`` and ``w`` to the basis
    (``w`` last), where ``s = q^T B q`` and ``q = z/||z||``.

    Returns
    -------
    solution : LowRankSolution
    trace : SolverTrace
    """
    config = config or SolverConfig(method="alr")
    run = _Run("alr", A, y0, config, cache)
    state = run.state
    norm_A = run.cache.norm
    while True:
        w = _project_out(state.U, state.AU[:, -1])
        Z = run.gramian()
        if Z is None:
            return run.finish(UNSTABLE)
        run.remember()
        z = Z[-1, :]
        w_norm, z_norm = np.linalg.norm(w), np.linalg.norm(z)
        if run.check(w_norm * z_norm) == CONVERGED:
            return run.finish(CONVERGED)
        if w_norm <= BREAKDOWN_TOL * norm_A:
            return run.finish(BREAKDOWN)
        if not run.budget_left(2):
            return run.finish(EXHAUSTED)
        q = z / z_norm
        s = float(q @ state.B @ q)
        s, v = _shifted_solve_guarded(run.cache, s, w)
        if state.extend(run.A, np.column_stack([v, w]), drop_tol=config.drop_tol) == 0:
            return run.finish(BREAKDOWN)
        run.stepped(shift=s)


def doubling_solve(A, y0, config=None, cache=None):
    """Doubling method: append the correction ``P1`` solving
    ``A P1 + P1 B^T = -(A U - U B) Z`` each iteration.

    ``P1`` is orthonormalized through its SVD so that, when the rank budget
    cuts the update short, the dominant directions are kept.
    """
    config = config or SolverConfig(method="doubling")
    run = _Run("doubling", A, y0, config, cache)
    state = run.state
    while True:
        Z = run.gramian()
        if Z is None:
            return run.finish(UNSTABLE)
        run.remember()
        F = state.residual_factor() @ Z
        if run.check(np.linalg.norm(F)) == CONVERGED:
            return run.finish(CONVERGED)
        room = config.r_max - state.rank
        if room <= 0:
            return run.finish(EXHAUSTED)
        P1 = solve_projected_sylvester(run.A, state.B, F, run.cache, require_stable=False)
        W, sv, _ = np.linalg.svd(P1, full_matrices=False)
        keep = sv > config.drop_tol * sv[0] if sv.size and sv[0] > 0 else np.zeros(0, bool)
        W = W[:, keep][:, :room]
        if W.shape[1] == 0 or state.extend(run.A, W, drop_tol=config.drop_tol) == 0:
            return run.finish(BREAKDOWN)
        run.stepped()


def kpik_solve(A, y0, config=None, cache=None):
    """Extended Krylov (KPIK) method.

    Iteration ``m`` appends ``A^{-1} u_inv`` and then ``A u_dir`` where
    ``u_inv`` / ``u_dir`` are the most recent inverse / direct basis columns,
    so after ``m`` iterations ``U`` spans
    ``{A^{-m} y0, ..., y0, ..., A^m y0}``.  The inverse uses the ``s = 0``
    entry of the shift cache, i.e. one factorization of ``A`` for the run.
    """
    config = config or SolverConfig(method="kpik")
    run = _Run("kpik", A, y0, config, cache)
    state = run.state
    i_inv = i_dir = 0
    while True:
        Z = run.gramian()
        if Z is None:
            return run.finish(UNSTABLE)
        run.remember()
        if run.check(np.linalg.norm(state.residual_factor() @ Z)) == CONVERGED:
            return run.finish(CONVERGED)
        if not run.budget_left(2):
            return run.finish(EXHAUSTED)
        inv = run.cache.solve(0.0, state.U[:, i_inv])
        direct = state.AU[:, i_dir].copy()
        added = 0
        if state.extend(run.A, inv, drop_tol=config.drop_tol):
            i_inv = state.rank - 1
            added += 1
        if state.extend(run.A, direct, drop_tol=config.drop_tol):
            i_dir = state.rank - 1
            added += 1
        if added == 0:
            return run.finish(BREAKDOWN)
        run.stepped()


def _rksm_shift(ritz, poles, bounds):
    """Greedy real pole on the mirrored spectral interval.

    Maximizes ``prod |sigma - sigma_j| / prod |sigma - theta_j|`` over a
    geometric grid of ``sigma`` in ``[a, b]`` (``theta_j`` Ritz values,
    ``sigma_j`` earlier poles) and returns the shift ``s = -sigma`` used in
    ``(A + s I)^{-1}``.
    """
    a, b = bounds
    grid = np.geomspace(a, b, RKSM_GRID) if b > a else np.array([a])
    with np.errstate(divide="ignore", invalid="ignore"):
        score = -np.sum(np.log(np.abs(grid[:, None] - ritz[None, :])), axis=1)
        if poles:
            score = score + np.sum(np.log(np.abs(grid[:, None] - np.asarray(poles)[None, :])), axis=1)
    score = np.nan_to_num(score, nan=-np.inf)
    return -float(grid[int(np.argmax(score))])


def _ritz_bounds(ritz, poles):
    mags = np.abs(ritz.real)
    if poles:
        mags = np.concatenate([mags, np.asarray(poles)])
    return float(mags.min()), float(mags.max())


def rksm_solve(A, y0, config=None, cache=None, extended=None):
    """Rational Krylov method with greedily chosen real shifts.

    Iteration ``m`` appends ``(A + s_m I)^{-1} u_last``; the extended variant
    (``method='erksm'`` or ``extended=True``) also appends the Krylov vector
    ``A u_last``.  The pole ``sigma_m = -s_m`` is picked on the positive
    interval ``rksm_shift_bounds`` or, if unset, on the interval spanned by
    the magnitudes of the current Ritz values and earlier poles.
    """
    config = config or SolverConfig(method="rksm")
    if extended is None:
        extended = config.method == "erksm"
    run = _Run("erksm" if extended else "rksm", A, y0, config, cache)
    state = run.state
    poles = []
    growth = 2 if extended else 1
    while True:
        Z = run.gramian()
        if Z is None:
            return run.finish(UNSTABLE)
        run.remember()
        if run.check(np.linalg.norm(state.residual_factor() @ Z)) == CONVERGED:
            return run.finish(CONVERGED)
        if not run.budget_left(growth):
            return run.finish(EXHAUSTED)
        ritz = state.schur.eigenvalues
        bounds = config.rksm_shift_bounds or _ritz_bounds(ritz, poles)
        s = _rksm_shift(ritz, poles, bounds)
        u_last = state.U[:, -1]
        s, v = _shifted_solve_guarded(run.cache, s, u_last)
        cand = np.column_stack([v, state.AU[:, -1]]) if extended else v
        if state.extend(run.A, cand, drop_tol=config.drop_tol) == 0:
            return run.finish(BREAKDOWN)
        poles.append(-s)
        run.stepped(shift=s)


_DISPATCH = {
    "alr": alr_solve,
    "doubling": doubling_solve,
    "kpik": kpik_solve,
    "rksm": rksm_solve,
    "erksm": rksm_solve,
}


def solve(A, y0, config=None, cache=None):
    """Run the method named by ``config.method``."""
    config = config or SolverConfig()
    return _DISPATCH[config.method](A, y0, config, cache)
