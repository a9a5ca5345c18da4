"""Command line entry point: ``crs bench``, ``crs solve`` and ``crs arc``."""

from __future__ import annotations

import argparse
import contextlib
import sys

import numpy as np

from .arc import ArcConfig, arc_minimize, write_history
from .bench import InstanceSpec, run_experiment
from .model import load_problem, load_problem_files
from .solvers import SolverConfig, solve_crs
from .testfuncs import get_objective


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _bench(args):
    if args.case == "easy":
        params = args.kappa or [10.0]
        key = "kappa"
    else:
        params = args.gap or [1e-2]
        key = "gap"
    grid = []
    for n in args.n:
        for K in args.block or [n]:
            for p in params:
                grid.append(InstanceSpec(n=n, K=K, case=args.case, rho=args.rho, seed=args.seed, **{key: p}))
    methods = [(m, v) for m in args.method for v in args.variant]
    with _output(args.out) as fh:
        run_experiment(grid, methods, trials=args.trials, out=fh, max_iter=args.max_iter)
    return 0


def _solve(args):
    if args.problem:
        prob = load_problem(args.problem)
    else:
        if args.matrix is None or args.rhs is None or args.rho is None:
            raise SystemExit("crs solve: give --problem, or all of --matrix, --rhs and --rho")
        prob = load_problem_files(args.matrix, args.rhs, args.rho)
    cfg = SolverConfig(max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    rep = solve_crs(prob, args.method, args.variant, epsilon=args.epsilon, cfg=cfg)
    for key, val in rep.csv_row().items():
        print(f"{key}: {val}")
    print(f"status: {rep.status}")
    print(f"theta: {rep.theta!r}")
    if args.x_out:
        np.savetxt(args.x_out, rep.x, fmt="%.17g")
    return 0 if rep.status == "converged" else 1


def _arc(args):
    obj, x0 = get_objective(args.objective, args.dim)
    cfg = ArcConfig(max_outer=args.max_outer, seed=args.seed)
    x, history = arc_minimize(obj, x0, cfg, args.subsolver)
    with _output(args.out) as fh:
        write_history(fh, history, timing=not args.no_timing)
    if args.out not in (None, "-"):
        s = history.summary
        print(f"status={history.status} n_i={s['n_i']} f*={s['f*']!r}")
    return 0 if history.status == "converged" else 1


def build_parser():
    p = argparse.ArgumentParser(prog="crs", description="Cubic regularization subproblem tools.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the synthetic benchmark and write CSV")
    b.add_argument("--case", choices=["easy", "hard"], default="easy")
    b.add_argument("--n", type=int, nargs="+", default=[100])
    b.add_argument("--block", type=int, nargs="+", help="block sizes K (default: n)")
    b.add_argument("--kappa", type=float, nargs="+")
    b.add_argument("--gap", type=float, nargs="+")
    b.add_argument("--rho", type=float, default=1.0)
    b.add_argument("--method", choices=["apg", "bbm"], nargs="+", default=["apg"])
    b.add_argument("--variant", choices=["sp", "ap"], nargs="+", default=["sp"])
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--max-iter", type=int, default=20000)
    b.add_argument("--out", default=None, help="CSV path (default: stdout)")
    b.set_defaults(func=_bench)

    s = sub.add_parser("solve", help="solve one problem read from files")
    s.add_argument("--problem", help="key=value manifest naming matrix, rhs and rho")
    s.add_argument("--matrix", help="Matrix Market file or dense text array")
    s.add_argument("--rhs", help="text file with the vector b")
    s.add_argument("--rho", type=float)
    s.add_argument("--method", choices=["apg", "bbm"], default="apg")
    s.add_argument("--variant", choices=["sp", "ap"], default="sp")
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--x-out", help="write the solution vector here")
    s.set_defaults(func=_solve)

    a = sub.add_parser("arc", help="minimize a test function by adaptive cubic regularization")
    a.add_argument("--objective", choices=["rosenbrock", "humps"], default="rosenbrock")
    a.add_argument("--dim", type=int, default=100)
    a.add_argument("--subsolver", choices=["apg", "bbm"], default="apg")
    a.add_argument("--max-outer", type=int, default=5000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--no-timing", action="store_true", help="omit wall-clock columns")
    a.add_argument("--out", default=None, help="CSV path (default: stdout)")
    a.set_defaults(func=_arc)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"crs {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
