"""
Small Lyapunov equations through the real Schur form
=====================================================

The projected problems inside every solver are small dense Lyapunov
equations ``B Z + Z B^T = -c c^T``. This script solves one with a
non-symmetric ``B`` (complex eigenvalue pairs included) and checks it
against the brute-force Kronecker solution.
"""

import numpy as np

from alrlyap import dense_lyapunov, real_schur, solve_small_lyapunov

rng = np.random.default_rng(0)

# a stable matrix with a rotation block, so the Schur form has a 2x2 block
B = rng.standard_normal((6, 6))
B -= (np.max(np.linalg.eigvals(B).real) + 0.5) * np.eye(6)
c = rng.standard_normal(6)

schur = real_schur(B)
print("Schur blocks (start, size):", schur.blocks)
print("eigenvalues:", np.round(np.sort_complex(schur.eigenvalues), 4))

###############################################################################
# Solve and compare with the Kronecker oracle.

Z = solve_small_lyapunov(B, np.outer(c, c), schur=schur)
X = dense_lyapunov(B, c).X
print("residual  ", np.linalg.norm(B @ Z + Z @ B.T + np.outer(c, c)))
print("vs oracle ", np.linalg.norm(Z - X) / np.linalg.norm(X))
print("min eigenvalue of Z (a Gramian, so >= 0):", np.linalg.eigvalsh(Z).min())
