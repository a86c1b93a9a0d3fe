"""Low-rank solvers for ``A X + X A^T = -y0 y0^T`` with sparse stable ``A``.

The main entry point is :func:`solve`, which builds an orthonormal basis
``U`` and returns ``X ~ U Z U^T`` together with a per-iteration trace.
"""
from .dense import gram_schmidt_extend, real_schur, singular_values, solve_small_lyapunov
from .errors import SingularShift, UnstableProjection
from .galerkin import (
    ProjectionState,
    bound_constant,
    functional_gradient,
    functional_value,
    residual_norm,
    solve_projected_sylvester,
)
from .oracle import dense_lyapunov, dense_sylvester
from .problems import ProblemSpec, convdiff2d, convdiff3d, laplace2d, laplace3d, make_operator, make_rhs
from .solvers import (
    METHODS,
    IterationRecord,
    LowRankSolution,
    SolverConfig,
    SolverTrace,
    alr_solve,
    doubling_solve,
    kpik_solve,
    rksm_solve,
    solve,
)
from .sparse import ShiftedFactorCache, read_matrix_market, read_vector, write_matrix_market, write_vector

__all__ = [
    "METHODS",
    "IterationRecord",
    "LowRankSolution",
    "ProblemSpec",
    "ProjectionState",
    "ShiftedFactorCache",
    "SingularShift",
    "SolverConfig",
    "SolverTrace",
    "UnstableProjection",
    "alr_solve",
    "bound_constant",
    "convdiff2d",
    "convdiff3d",
    "dense_lyapunov",
    "dense_sylvester",
    "doubling_solve",
    "functional_gradient",
    "functional_value",
    "gram_schmidt_extend",
    "kpik_solve",
    "laplace2d",
    "laplace3d",
    "make_operator",
    "make_rhs",
    "read_matrix_market",
    "read_vector",
    "real_schur",
    "residual_norm",
    "rksm_solve",
    "singular_values",
    "solve",
    "solve_projected_sylvester",
    "solve_small_lyapunov",
    "write_matrix_market",
    "write_vector",
]
