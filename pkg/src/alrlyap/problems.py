"""Finite-difference model operators on the unit square / cube.

All generators use ``nx`` interior points per dimension, mesh width
``h = 1/(nx + 1)``, homogeneous Dirichlet boundary values eliminated, and
lexicographic ordering with ``x`` varying fastest.  The ``1/h**2`` scaling is
included.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .sparse import as_csr, read_matrix_market, read_vector

__all__ = [
    "ProblemSpec",
    "PROBLEMS",
    "laplace2d",
    "laplace3d",
    "convdiff2d",
    "convdiff3d",
    "make_operator",
    "make_rhs",
    "grid_nodes",
]


def _second_difference(nx):
    h = 1.0 / (nx + 1)
    e = np.ones(nx)
    return sp.diags([e[1:], -2.0 * e, e[1:]], [-1, 0, 1], format="csr") / h**2


def _first_difference(nx):
    h = 1.0 / (nx + 1)
    e = np.ones(nx - 1)
    return sp.diags([-e, e], [-1, 1], shape=(nx, nx), format="csr") / (2.0 * h)


def grid_nodes(nx):
    """Interior node coordinates ``i*h`` for ``i = 1..nx``."""
    h = 1.0 / (nx + 1)
    return h * np.arange(1, nx + 1)


def _kron_sum(ops):
    # ops[0] acts on x (fastest index), ops[-1] on the slowest one
    n = ops[0].shape[0]
    I = sp.identity(n, format="csr")
    total = None
    d = len(ops)
    for axis, op in enumerate(ops):
        factors = [I] * d
        factors[d - 1 - axis] = op
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        total = term if total is None else total + term
    return total


def _check_nx(nx):
    if int(nx) != nx or nx < 1:
        raise ValueError(f"grid size must be a positive integer, got {nx!r}")
    return int(nx)


def laplace2d(nx):
    """5-point Laplacian ``u_xx + u_yy`` on an ``nx x nx`` interior grid."""
    nx = _check_nx(nx)
    T = _second_difference(nx)
    return as_csr(_kron_sum([T, T]))


def laplace3d(nx):
    """7-point Laplacian on an ``nx x nx x nx`` interior grid."""
    nx = _check_nx(nx)
    T = _second_difference(nx)
    return as_csr(_kron_sum([T, T, T]))


def convdiff2d(nx, cx=10.0, cy=1000.0):
    """Central differences for ``u_xx + u_yy - cx*x*u_x - cy*y*u_y``.

    With ``cx = cy = 0`` this is :func:`laplace2d`.
    """
    nx = _check_nx(nx)
    T = _second_difference(nx)
    D = _first_difference(nx)
    X = sp.diags(grid_nodes(nx))
    return as_csr(_kron_sum([T - cx * (X @ D), T - cy * (X @ D)]))


def convdiff3d(nx, cx=10.0, cy=1000.0, cz=1.0):
    """Central differences for ``u_xx + u_yy + u_zz - cx*x*u_x - cy*y*u_y - cz*u_z``."""
    nx = _check_nx(nx)
    T = _second_difference(nx)
    D = _first_difference(nx)
    X = sp.diags(grid_nodes(nx))
    return as_csr(_kron_sum([T - cx * (X @ D), T - cy * (X @ D), T - cz * D]))


PROBLEMS = {
    "laplace2d": (laplace2d, 2),
    "laplace3d": (laplace3d, 3),
    "convdiff2d": (convdiff2d, 2),
    "convdiff3d": (convdiff3d, 3),
}

RHS_KINDS = ("ones", "gaussian2d", "file")


@dataclass(frozen=True)
class ProblemSpec:
    """A model problem: operator name, grid size and right-hand side kind."""

    name: str
    grid_points_per_dim: int = 1
    rhs_kind: str = "ones"
    matrix_path: Optional[str] = None
    rhs_path: Optional[str] = None

    def __post_init__(self):
        if self.name not in PROBLEMS and self.name != "external":
            raise ValueError(f"unknown problem {self.name!r}")
        if self.rhs_kind not in RHS_KINDS:
            raise ValueError(f"unknown rhs kind {self.rhs_kind!r}")
        if self.grid_points_per_dim < 1:
            raise ValueError("grid_points_per_dim must be >= 1")
        if self.rhs_kind == "gaussian2d" and self.name != "laplace2d":
            raise ValueError("gaussian2d right-hand side is only defined for laplace2d")
        if self.name == "external" and self.matrix_path is None:
            raise ValueError("external problems need a matrix_path")
        if self.rhs_kind == "file" and self.rhs_path is None:
            raise ValueError("rhs_kind='file' needs an rhs_path")

    @property
    def n(self):
        if self.name == "external":
            return None
        return self.grid_points_per_dim ** PROBLEMS[self.name][1]


def make_operator(spec):
    if spec.name == "external":
        return read_matrix_market(spec.matrix_path)
    return PROBLEMS[spec.name][0](spec.grid_points_per_dim)


def gaussian_bump(x, y):
    return np.exp(-((x - 0.5) ** 2) - 1.5 * (y - 0.7) ** 2)


def make_rhs(spec, n=None):
    """Right-hand side vector ``y0`` for ``spec``.

    ``n`` is only needed for ``ones`` on an external problem.
    """
    if spec.rhs_kind == "file":
        return read_vector(spec.rhs_path)
    if spec.rhs_kind == "gaussian2d":
        t = grid_nodes(spec.grid_points_per_dim)
        X, Y = np.meshgrid(t, t)  # rows index y, columns index x: x fastest after ravel
        return gaussian_bump(X, Y).ravel()
    if n is None:
        n = spec.n
    if n is None:
        raise ValueError("problem size unknown; pass n explicitly")
    return np.ones(n)
