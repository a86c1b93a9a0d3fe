"""
Benchmark tables from the command line
======================================

``python -m alrlyap.bench run`` writes one CSV row per method and
``python -m alrlyap.bench table`` turns CSV files into a markdown table with
an ``it-s/rank`` column. This script drives both through the in-process
entry point and prints the table.
"""

import tempfile
from pathlib import Path

from alrlyap.bench import main

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    for problem, grid in (("laplace2d", 32), ("laplace3d", 10)):
        status = main([
            "run", "--problem", problem, "--grid", str(grid),
            "--method", "alr,kpik,rksm,erksm", "--eps", "1e-8",
            "--out", str(out / f"{problem}.csv"),
            "--shifts-out", str(out / f"{problem}_shifts.txt"),
        ])
        print(problem, "exit status", status)
    main(["table", str(out / "laplace2d.csv"), str(out / "laplace3d.csv")])
