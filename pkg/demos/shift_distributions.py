"""
Where the shifts go
===================

The adaptive method picks each shift from the projected matrix, the
rational Krylov baseline from a greedy rule on a real interval. This script
collects both shift sequences on the 3D Laplacian and bins them on a log
scale. The data are the same as the ``--shifts-out`` files of the benchmark
CLI.
"""

import numpy as np

from alrlyap import SolverConfig, laplace3d, solve

A = laplace3d(10)
y0 = np.ones(A.shape[0])

shifts = {}
for method in ("alr", "rksm"):
    _, trace = solve(A, y0, SolverConfig(method=method))
    shifts[method] = -np.array(trace.shifts)
    print(f"{method}: {len(trace.shifts)} shifts, range [{shifts[method].min():.1f}, {shifts[method].max():.1f}]")

###############################################################################
# Text histogram of ``-s`` on log-spaced bins spanning the spectrum of ``-A``.

h = 1.0 / 11
edges = np.geomspace(3 * np.pi**2 * 0.9, 12 / h**2, 9)
for method, s in shifts.items():
    counts, _ = np.histogram(s, bins=edges)
    print(method)
    for lo, hi, k in zip(edges[:-1], edges[1:], counts):
        print(f"  {lo:8.1f} - {hi:8.1f} | {'#' * k}")
