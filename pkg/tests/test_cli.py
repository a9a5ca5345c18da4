import csv
import io

import numpy as np
import pytest

from crs.cli import main
from crs.model import CrsProblem, save_problem
from crs.operators import DenseOperator


def test_bench_to_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(["bench", "--case", "easy", "--n", "20", "--block", "10", "--kappa", "10",
                 "--method", "apg", "bbm", "--trials", "2", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert {r["method"] for r in rows} == {"APG(SP)", "BBM(SP)"}


def test_bench_bad_block(capsys):
    assert main(["bench", "--n", "10", "--block", "3"]) == 2
    assert "error" in capsys.readouterr().err


def test_solve_from_files(tmp_path, capsys):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6))
    manifest = save_problem(tmp_path, CrsProblem(DenseOperator(a + a.T), rng.standard_normal(6), 1.0))
    assert main(["solve", "--problem", str(manifest)]) == 0
    out = capsys.readouterr().out
    assert "fval:" in out and "status: converged" in out
    code = main(["solve", "--matrix", str(tmp_path / "problem.mtx"), "--rhs",
                 str(tmp_path / "problem_b.txt"), "--rho", "1", "--method", "bbm",
                 "--variant", "ap", "--x-out", str(tmp_path / "x.txt")])
    assert code == 0
    assert np.loadtxt(tmp_path / "x.txt").shape == (6,)


def test_solve_needs_inputs():
    with pytest.raises(SystemExit):
        main(["solve", "--rho", "1"])


def test_arc_stdout(capsys):
    assert main(["arc", "--objective", "rosenbrock", "--dim", "4", "--no-timing"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("k,f,gnorm")
