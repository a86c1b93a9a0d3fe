"""Benchmark harness: run solvers on model problems and tabulate the results.

Usage::

    python -m alrlyap.bench run --problem laplace2d --grid 64 --method alr,kpik --out r.csv
    python -m alrlyap.bench run --matrix A.mtx --rhs y0.txt --method alr
    python -m alrlyap.bench table r.csv [more.csv ...]

``run`` writes one CSV row per (problem, method) and exits with 0 when every
run converged, 2 when some run hit the rank budget, and 1 on any error.
"""
import argparse
import csv
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import SingularShift, UnstableProjection
from .oracle import dense_lyapunov, lyapunov_residual
from .problems import PROBLEMS, ProblemSpec, make_operator, make_rhs
from .solvers import CONVERGED, EXHAUSTED, METHODS, SolverConfig, solve
from .sparse import ShiftedFactorCache

CSV_COLUMNS = ["problem", "grid", "method", "iterations", "rank", "residual", "factorize_s", "solve_s", "wall_s"]
TIMING_COLUMNS = ("factorize_s", "solve_s", "wall_s")
VERIFY_MAX_N = 400


@dataclass
class BenchResultRow:
    problem: str
    grid: int
    method: str
    iterations: int
    rank: int
    residual: float
    factorize_s: float
    solve_s: float
    wall_s: float

    def as_csv(self):
        return {
            "problem": self.problem,
            "grid": str(self.grid),
            "method": self.method,
            "iterations": str(self.iterations),
            "rank": str(self.rank),
            "residual": repr(float(self.residual)),
            "factorize_s": f"{self.factorize_s:.6f}",
            "solve_s": f"{self.solve_s:.6f}",
            "wall_s": f"{self.wall_s:.6f}",
        }

    @classmethod
    def from_csv(cls, rec):
        missing = [c for c in CSV_COLUMNS if c not in rec]
        if missing:
            raise ValueError(f"CSV row is missing columns {missing}")
        try:
            return cls(
                problem=rec["problem"],
                grid=int(rec["grid"]),
                method=rec["method"],
                iterations=int(rec["iterations"]),
                rank=int(rec["rank"]),
                residual=float(rec["residual"]),
                factorize_s=float(rec["factorize_s"]),
                solve_s=float(rec["solve_s"]),
                wall_s=float(rec["wall_s"]),
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed CSV row {rec!r}: {exc}") from exc


def write_csv(rows, stream):
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv())


def read_csv(stream):
    reader = csv.DictReader(stream)
    if reader.fieldnames is None or list(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"expected CSV columns {CSV_COLUMNS}, got {reader.fieldnames}")
    return [BenchResultRow.from_csv(rec) for rec in reader]


def grid_label(problem, grid):
    if problem in PROBLEMS:
        return "x".join([str(grid)] * PROBLEMS[problem][1])
    return str(grid)


def _grid_from_label(label):
    return int(label.split("x")[0])


TABLE_HEADER = ["problem", "grid", "method", "factorize (s)", "solve (s)", "final (s)", "residual", "it-s/rank"]


def _method_order(method):
    return METHODS.index(method) if method in METHODS else len(METHODS)


def format_table(rows):
    """Markdown table grouped by problem and grid, methods in a fixed order."""
    rows = sorted(rows, key=lambda r: (r.problem, r.grid, _method_order(r.method), r.method))
    lines = [
        "| " + " | ".join(TABLE_HEADER) + " |",
        "|" + "|".join(["---"] * len(TABLE_HEADER)) + "|",
    ]
    previous = None
    for row in rows:
        group = (row.problem, row.grid)
        if previous is not None and group != previous:
            lines.append("|" + "|".join([" "] * len(TABLE_HEADER)) + "|")
        first = group != previous
        cells = [
            row.problem if first else "",
            grid_label(row.problem, row.grid) if first else "",
            row.method,
            f"{row.factorize_s:.4f}",
            f"{row.solve_s:.4f}",
            f"{row.wall_s:.4f}",
            repr(float(row.residual)),
            f"{row.iterations}/{row.rank}",
        ]
        lines.append("| " + " | ".join(cells) + " |")
        previous = group
    return "\n".join(lines) + "\n"


def parse_table(text):
    """Inverse of :func:`format_table` for the non-timing columns."""
    rows = []
    problem = grid = None
    for line in text.strip().splitlines()[2:]:
        cells = [c.strip() for c in line.strip().strip("|").split("|")]
        if not any(cells):
            continue
        if cells[0]:
            problem, grid = cells[0], _grid_from_label(cells[1])
        iterations, rank = (int(x) for x in cells[7].split("/"))
        rows.append(
            BenchResultRow(
                problem=problem,
                grid=grid,
                method=cells[2],
                iterations=iterations,
                rank=rank,
                residual=float(cells[6]),
                factorize_s=float(cells[3]),
                solve_s=float(cells[4]),
                wall_s=float(cells[5]),
            )
        )
    return rows


@dataclass
class RunOutcome:
    row: BenchResultRow
    status: str
    shifts: list
    verified_residual: float = None
    oracle_error: float = None
    max_solve_residual: float = None


def _run_one(A, y0, problem, grid, method, args, X_ref=None):
    cache = ShiftedFactorCache(A, verify=args.verify)
    config = SolverConfig(method=method, eps=args.eps, r_max=args.rmax)
    t0 = time.perf_counter()
    solution, trace = solve(A, y0, config, cache)
    wall = time.perf_counter() - t0
    row = BenchResultRow(
        problem=problem,
        grid=grid,
        method=method,
        iterations=trace.iterations,
        rank=trace.rank,
        residual=trace.residual,
        factorize_s=trace.factorize_seconds,
        solve_s=trace.solve_seconds,
        wall_s=wall,
    )
    outcome = RunOutcome(row=row, status=trace.status, shifts=trace.shifts)
    if args.verify:
        outcome.max_solve_residual = cache.max_residual
        if X_ref is not None:
            X = solution.to_dense()
            outcome.verified_residual = lyapunov_residual(A, X, y0) / float(y0 @ y0)
            outcome.oracle_error = float(np.linalg.norm(X - X_ref) / np.linalg.norm(X_ref))
    return outcome


def _shift_path(path, method, n_methods):
    if n_methods == 1:
        return path
    root, ext = os.path.splitext(path)
    return f"{root}.{method}{ext or '.txt'}"


def _load_problem(args):
    if args.matrix:
        spec = ProblemSpec("external", rhs_kind="file" if args.rhs else "ones", matrix_path=args.matrix, rhs_path=args.rhs)
        A = make_operator(spec)
        y0 = make_rhs(spec, n=A.shape[0])
        if y0.shape[0] != A.shape[0]:
            raise ValueError(f"rhs has length {y0.shape[0]} but matrix is {A.shape[0]}x{A.shape[0]}")
        return "external", A.shape[0], A, y0
    rhs_kind = args.rhs_kind or ("gaussian2d" if args.problem == "laplace2d" else "ones")
    spec = ProblemSpec(args.problem, args.grid, rhs_kind)
    return args.problem, args.grid, make_operator(spec), make_rhs(spec)


def _probe_factorization(A, seed):
    # backward error of one shifted solve against a seeded random right-hand side
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(A.shape[0])
    cache = ShiftedFactorCache(A)
    try:
        x = cache.solve(0.0, b)
    except SingularShift:
        print("verify: A is numerically singular", file=sys.stderr)
        return
    err = np.linalg.norm(A @ x - b) / (cache.norm * np.linalg.norm(x) + np.linalg.norm(b))
    print(f"verify: random-probe backward error of A^-1 solve {err:.3e}", file=sys.stderr)


def cmd_run(args):
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        print(f"error: unknown method(s) {', '.join(unknown)}; choose from {', '.join(METHODS)}", file=sys.stderr)
        return 1
    try:
        problem, grid, A, y0 = _load_problem(args)
    except (OSError, ValueError) as exc:
        print(f"error: cannot load problem: {exc}", file=sys.stderr)
        return 1
    X_ref = None
    if args.verify:
        if A.shape[0] <= VERIFY_MAX_N:
            X_ref = dense_lyapunov(A, y0).X
        else:
            print(f"verify: n = {A.shape[0]} > {VERIFY_MAX_N}, dense checks skipped", file=sys.stderr)
        _probe_factorization(A, args.seed)

    def job(method):
        return _run_one(A, y0, problem, grid, method, args, X_ref)

    try:
        if args.jobs > 1 and len(methods) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                outcomes = list(pool.map(job, methods))
        else:
            outcomes = [job(m) for m in methods]
    except (UnstableProjection, SingularShift, np.linalg.LinAlgError, ValueError) as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return 1

    rows = [o.row for o in outcomes]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    if args.shifts_out:
        for o in outcomes:
            with open(_shift_path(args.shifts_out, o.row.method, len(methods)), "w") as fh:
                for s in o.shifts:
                    fh.write(f"{s!r}\n")

    status = 0
    for o in outcomes:
        if o.verified_residual is not None:
            print(
                f"verify: {o.row.method} dense residual {o.verified_residual:.3e}, "
                f"relative error vs oracle {o.oracle_error:.3e}",
                file=sys.stderr,
            )
            if o.status == CONVERGED and o.verified_residual > 1.1 * args.eps:
                print(f"error: {o.row.method} verified residual exceeds 1.1*eps", file=sys.stderr)
                status = 1
        if o.max_solve_residual is not None:
            print(f"verify: {o.row.method} max shifted-solve residual {o.max_solve_residual:.3e}", file=sys.stderr)
        if o.status == EXHAUSTED:
            if status == 0:
                status = 2
        elif o.status != CONVERGED:
            print(f"error: {o.row.method} terminated with status {o.status}", file=sys.stderr)
            status = 1
    return status


def cmd_table(args):
    rows = []
    try:
        for path in args.csv:
            with open(path, newline="") as fh:
                rows.extend(read_csv(fh))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(format_table(rows))
    return 0


class _Parser(argparse.ArgumentParser):
    # exit status 2 is reserved for runs that exhausted the rank budget
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="alrlyap-bench", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run solvers on a problem and write CSV rows")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", choices=sorted(PROBLEMS))
    src.add_argument("--matrix", metavar="FILE.mtx", help="Matrix Market operator")
    run.add_argument("--grid", type=int, default=64, help="interior points per dimension")
    run.add_argument("--rhs", metavar="FILE.txt", help="right-hand side, one value per line (with --matrix)")
    run.add_argument("--rhs-kind", choices=["ones", "gaussian2d"], default=None,
                     help="default: gaussian2d for laplace2d, ones otherwise")
    run.add_argument("--method", default="alr", help=f"comma-separated list from {','.join(METHODS)}")
    run.add_argument("--eps", type=float, default=1e-8)
    run.add_argument("--rmax", type=int, default=100)
    run.add_argument("--out", metavar="FILE.csv")
    run.add_argument("--shifts-out", metavar="FILE.txt")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--verify", action="store_true", help=f"dense cross-checks when n <= {VERIFY_MAX_N}")
    run.add_argument("--seed", type=int, default=None)
    run.set_defaults(func=cmd_run)

    table = sub.add_parser("table", help="format CSV results as a markdown table")
    table.add_argument("csv", nargs="+")
    table.set_defaults(func=cmd_table)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and args.rhs and not args.matrix:
        parser.error("--rhs requires --matrix")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
