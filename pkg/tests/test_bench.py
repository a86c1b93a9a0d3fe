import csv
import subprocess
import sys

import numpy as np
import pytest

from alrlyap.bench import (
    CSV_COLUMNS,
    TIMING_COLUMNS,
    BenchResultRow,
    format_table,
    main,
    parse_table,
    read_csv,
)
from alrlyap.problems import laplace2d
from alrlyap.sparse import write_matrix_market, write_vector


def load_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def non_timing(rows):
    return [{k: v for k, v in r.items() if k not in TIMING_COLUMNS} for r in rows]


def row(problem="laplace2d", grid=8, method="alr", it=4, rank=9, res=1e-9):
    return BenchResultRow(problem, grid, method, it, rank, res, 0.01, 0.002, 0.05)


def test_run_single_method(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["run", "--problem", "laplace2d", "--grid", "8", "--method", "alr", "--eps", "1e-8", "--rmax", "60", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2
    rec = load_rows(out)[0]
    assert rec["problem"] == "laplace2d" and rec["grid"] == "8" and rec["method"] == "alr"
    assert float(rec["residual"]) <= 1e-8
    assert int(rec["rank"]) <= 2 * int(rec["iterations"]) + 1


def test_run_two_methods_table1_counts(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--problem", "laplace2d", "--grid", "64", "--method", "alr,kpik", "--eps", "1e-8", "--out", str(out)]) == 0
    rows = {r["method"]: r for r in load_rows(out)}
    assert set(rows) == {"alr", "kpik"}
    assert abs(int(rows["alr"]["iterations"]) - 10) <= 3


def test_run_external_matches_generated(tmp_path):
    A = laplace2d(8)
    y0 = np.ones(64)
    write_matrix_market(tmp_path / "A.mtx", A)
    write_vector(tmp_path / "y0.txt", y0)
    gen, ext = tmp_path / "gen.csv", tmp_path / "ext.csv"
    gs, es = tmp_path / "gen_shifts.txt", tmp_path / "ext_shifts.txt"
    assert main(["run", "--problem", "laplace2d", "--grid", "8", "--rhs-kind", "ones", "--method", "alr",
                 "--out", str(gen), "--shifts-out", str(gs)]) == 0
    assert main(["run", "--matrix", str(tmp_path / "A.mtx"), "--rhs", str(tmp_path / "y0.txt"), "--method", "alr",
                 "--out", str(ext), "--shifts-out", str(es)]) == 0
    g, e = load_rows(gen)[0], load_rows(ext)[0]
    assert e["problem"] == "external" and e["grid"] == "64"
    for key in ("iterations", "rank", "residual"):
        assert g[key] == e[key]
    assert gs.read_text() == es.read_text()


def test_shifts_file(tmp_path):
    out, shifts = tmp_path / "r.csv", tmp_path / "s.txt"
    assert main(["run", "--problem", "laplace3d", "--grid", "6", "--method", "alr", "--out", str(out), "--shifts-out", str(shifts)]) == 0
    values = [float(x) for x in shifts.read_text().splitlines()]
    assert len(values) == int(load_rows(out)[0]["iterations"])
    assert all(v < 0 for v in values)


def test_shifts_file_per_method(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--problem", "laplace2d", "--grid", "6", "--method", "alr,rksm", "--out", str(out), "--shifts-out", str(tmp_path / "s.txt")]) == 0
    assert (tmp_path / "s.alr.txt").exists() and (tmp_path / "s.rksm.txt").exists()


def test_exit_code_rank_budget(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--problem", "laplace2d", "--grid", "16", "--method", "alr,kpik", "--rmax", "5", "--out", str(out)]) == 2
    assert len(load_rows(out)) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--problem", "laplace2d", "--method", "adi"],
        ["run", "--problem", "laplace5d"],
        ["run", "--matrix", "/nonexistent/A.mtx"],
        ["run", "--problem", "laplace2d", "--matrix", "A.mtx"],
        ["run", "--problem", "laplace2d", "--rhs", "y.txt"],
        ["run", "--problem", "laplace3d", "--rhs-kind", "gaussian2d"],
    ],
)
def test_exit_code_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 1
    assert "error" in capsys.readouterr().err


def test_solver_error_exit_code(tmp_path, capsys):
    import scipy.sparse as sp

    write_matrix_market(tmp_path / "S.mtx", sp.diags([0.0, -1.0, -2.0]))
    assert main(["run", "--matrix", str(tmp_path / "S.mtx"), "--method", "kpik"]) == 1
    assert "error" in capsys.readouterr().err


def test_determinism_and_jobs(tmp_path):
    args = ["run", "--problem", "convdiff2d", "--grid", "6", "--method", "alr,doubling,kpik,rksm,erksm", "--seed", "7"]
    a, b, c = (tmp_path / f"{k}.csv" for k in "abc")
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert main(args + ["--out", str(c), "--jobs", "3"]) == 0
    assert non_timing(load_rows(a)) == non_timing(load_rows(b)) == non_timing(load_rows(c))


def test_verify_flag(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["run", "--problem", "laplace2d", "--grid", "10", "--method", "alr,doubling", "--verify", "--seed", "1", "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert err.count("dense residual") == 2
    assert "backward error" in err


def test_table_single_row(tmp_path, capsys):
    p = tmp_path / "r.csv"
    assert main(["run", "--problem", "laplace2d", "--grid", "4", "--out", str(p)]) == 0
    assert main(["table", str(p)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert lines[0].split("|")[1:-1][-1].strip() == "it-s/rank"
    rec = load_rows(p)[0]
    assert f"{rec['iterations']}/{rec['rank']}" in lines[2]


def test_table_groups_grids():
    rows = [row(grid=16, method="kpik"), row(grid=8, method="kpik"), row(grid=16, method="alr"), row(grid=8, method="alr")]
    text = format_table(rows)
    lines = text.strip().splitlines()
    header = [c.strip() for c in lines[0].strip("|").split("|")]
    assert header[1] == "grid" and header[2] == "method" and header[-1] == "it-s/rank"
    body = lines[2:]
    assert len(body) == 5
    assert "8x8" in body[0] and "| alr |" in body[0]
    assert "| kpik |" in body[1]
    assert body[2].replace("|", "").strip() == ""
    assert "16x16" in body[3]
    assert format_table(list(reversed(rows))) == text


def test_table_csv_roundtrip(tmp_path):
    rows = [row(), row(method="kpik", it=5, rank=11, res=3.25e-9), row(problem="laplace3d", grid=10, res=7.1e-10),
            row(problem="external", grid=64, method="rksm", it=9, rank=10)]
    p = tmp_path / "r.csv"
    with open(p, "w", newline="") as fh:
        from alrlyap.bench import write_csv
        write_csv(rows, fh)
    with open(p, newline="") as fh:
        again = read_csv(fh)
    back = parse_table(format_table(again))
    key = lambda r: (r.problem, r.grid, r.method, r.iterations, r.rank, r.residual)
    assert sorted(map(key, back)) == sorted(map(key, rows))


def test_table_malformed_csv(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("problem,grid\nlaplace2d,8\n")
    assert main(["table", str(p)]) == 1
    p.write_text(",".join(CSV_COLUMNS) + "\nlaplace2d,eight,alr,1,3,1e-9,0,0,0\n")
    assert main(["table", str(p)]) == 1
    assert "error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "alrlyap.bench", "run", "--problem", "laplace2d", "--grid", "5", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(load_rows(out)) == 1
