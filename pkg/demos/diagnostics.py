"""
Diagnostics for a Galerkin subspace
===================================

For any orthonormal ``U`` whose span contains ``y0`` the package evaluates
the trajectory error functional ``F(U)``, its gradient, the residual of
``U Z U^T`` and the constant ``C`` of the bound ``F(U) <= C * residual``.
Here all of them are computed on a small convection-diffusion problem and
compared with dense references.
"""

import numpy as np

from alrlyap import (
    ProjectionState,
    ShiftedFactorCache,
    bound_constant,
    convdiff2d,
    dense_lyapunov,
    functional_gradient,
    functional_value,
    residual_norm,
)
from alrlyap.oracle import lyapunov_residual

rng = np.random.default_rng(3)
A = convdiff2d(6)
y0 = np.ones(A.shape[0])
X = dense_lyapunov(A, y0).X

###############################################################################
# Draw random subspaces containing ``y0`` until the projection is stable.

while True:
    U, _ = np.linalg.qr(np.column_stack([y0, rng.standard_normal((36, 4))]))
    state = ProjectionState.from_basis(A, y0, U)
    if np.linalg.eigvals(state.B).real.max() < 0:
        break

cache = ShiftedFactorCache(A)
fv = functional_value(state, A, cache, trace_X=np.trace(X))
R1 = residual_norm(state)
C = bound_constant(A, state.B)
print(f"F(U)        = {fv.F:.4e}")
print(f"residual    = {R1:.4e}  (dense: {lyapunov_residual(A, U @ state.Z @ U.T, y0):.4e})")
print(f"C * resid.  = {C * R1:.4e}  >= F(U)")

###############################################################################
# One gradient step on ``U`` (followed by re-orthonormalization) lowers F.

G = functional_gradient(state, A, cache)
G -= U @ (U.T @ G)
for step in (1e-6, 1e-5, 1e-4):
    V, _ = np.linalg.qr(np.column_stack([y0, U[:, 1:] - step * G[:, 1:]]))
    trial = ProjectionState.from_basis(A, y0, V, require_stable=False)
    print(f"step {step:.0e}: F = {functional_value(trial, A, cache, trace_X=np.trace(X)).F:.4e}")
