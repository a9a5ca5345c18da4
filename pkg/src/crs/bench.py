"""Random CRS instances with a known optimum of -1, and the experiment runner.

Instances follow the classical diagonal construction (spectrum with
``lambda_1 = -1`` and ``lambda_n = 1``, optimum placed by hand) rotated by
a random block-orthogonal ``Q``, so ``A`` has ``n/K`` dense ``K x K``
blocks.  The data triple ``(A, b, rho)`` is finally rescaled so the
optimal value is exactly -1.

Random numbers come from numpy's PCG64 (``numpy.random.default_rng``).
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .model import CrsProblem, f1_value
from .operators import SparseOperator
from .solvers import SolverConfig, solve_crs

__all__ = [
    "InstanceSpec",
    "GeneratedInstance",
    "generate",
    "run_experiment",
    "eig_tolerance",
    "BENCH_COLUMNS",
    "CsvSink",
]

HARD_CASE_MASS = 0.5
TARGET_GAP = 1e-6

BENCH_COLUMNS = [
    "trial", "method", "case", "n", "K", "param",
    "fval_opt", "iter", "matvecs", "time", "time_eig", "status",
]
TIMING_COLUMNS = ("time", "time_eig")


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    K: int
    case: str = "easy"
    kappa: float = 10.0
    gap: float = 1e-2
    rho: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.case not in ("easy", "hard"):
            raise ValueError("case must be 'easy' or 'hard'")
        if self.n < 2 or self.K < 1 or self.n % self.K:
            raise ValueError("need n >= 2 and K dividing n")
        if self.case == "easy" and not self.kappa > 1:
            raise ValueError("easy case needs kappa > 1")
        if self.case == "hard":
            if not self.gap > 0:
                raise ValueError("hard case needs gap > 0")
            if self.n < 3 or self.gap >= 2.0:
                raise ValueError("hard case needs n >= 3 and gap < 2")
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def param(self):
        return self.kappa if self.case == "easy" else self.gap


@dataclass
class GeneratedInstance:
    problem: CrsProblem
    x_star: np.ndarray
    lambda_star: float
    f_star: float = -1.0
    spec: InstanceSpec = None


def _block_orthogonal(rng, n, K):
    if K == 1:
        return sp.identity(n, format="csr")
    blocks = []
    for _ in range(n // K):
        q, r = np.linalg.qr(rng.standard_normal((K, K)))
        q *= np.sign(np.diag(r))
        blocks.append(q)
    return sp.block_diag(blocks, format="csr")


def generate(spec):
    """Build an instance satisfying the optimality conditions at a known ``x*``.

    Raises
    ------
    ValueError
        For inconsistent specs, or if the built instance fails its own
        certificate checks.
    """
    rng = np.random.default_rng(spec.seed)
    n, rho = spec.n, spec.rho
    lam = np.empty(n)
    lam[0] = -1.0
    if spec.case == "easy":
        lam[-1] = 1.0
        lam[1:-1] = rng.uniform(-1.0, 1.0, n - 2)
        lam_star = (lam[-1] - spec.kappa * lam[0]) / (spec.kappa - 1.0)
        if not lam_star > -lam[0]:
            raise ValueError("kappa gives a multiplier below -lambda_1")
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        x_bar = (lam_star / rho) * u
        b_bar = -(lam + lam_star) * x_bar
    else:
        lam[1] = lam[0] + spec.gap
        lam[2:] = rng.uniform(lam[1], 1.0, n - 2)
        lam_star = -lam[0]
        w = rng.standard_normal(n)
        w[0] = 0.0
        w /= np.linalg.norm(w)
        radius = lam_star / rho
        x_perp = HARD_CASE_MASS * radius * w
        b_bar = -(lam + lam_star) * x_perp
        b_bar[0] = 0.0
        x_bar = x_perp.copy()
        x_bar[0] = radius * math.sqrt(1.0 - HARD_CASE_MASS**2)

    perm = rng.permutation(n)
    lam, b_bar, x_bar = lam[perm], b_bar[perm], x_bar[perm]
    Q = _block_orthogonal(rng, n, spec.K)
    A = (Q.T @ sp.diags(lam) @ Q).tocsr()
    A = ((A + A.T) * 0.5).tocsr()
    b = Q.T @ b_bar
    x_star = Q.T @ x_bar

    f_raw = f1_value(CrsProblem(SparseOperator(A, check=False), b, rho), x_star)
    if not f_raw < 0:
        raise ValueError("constructed optimum is not negative; cannot normalize to -1")
    c = -1.0 / f_raw
    prob = CrsProblem(SparseOperator(A * c), b * c, rho * c)
    inst = GeneratedInstance(prob, x_star, c * lam_star, -1.0, spec)
    _certify(inst, c * lam[np.argmin(lam)])
    prob.A.reset_count()
    return inst


def _certify(inst, lambda_1):
    prob = inst.problem
    x = inst.x_star
    r = prob.A.apply(x) + prob.b + inst.lambda_star * x
    bn = float(np.linalg.norm(prob.b))
    if float(np.linalg.norm(r)) > 1e-8 * max(bn, 1e-300):
        raise ValueError("generated instance violates stationarity")
    if abs(inst.lambda_star - prob.rho * float(np.linalg.norm(x))) > 1e-10 * inst.lambda_star:
        raise ValueError("generated instance violates lambda* = rho ||x*||")
    if inst.lambda_star < -lambda_1 * (1 - 1e-12):
        raise ValueError("generated instance violates A + lambda* I >= 0")
    if abs(f1_value(prob, x) + 1.0) > 1e-10:
        raise ValueError("generated instance does not have optimal value -1")


def eig_tolerance(spec):
    """Lanczos tolerance recipe: ``5 / kappa`` (easy) or ``1e-6`` (hard)."""
    return 5.0 / spec.kappa if spec.case == "easy" else 1e-6


class CsvSink:
    """Serializes row writes to a csv file object."""

    def __init__(self, fh, columns=BENCH_COLUMNS):
        self._writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        self._lock = threading.Lock()
        self._writer.writeheader()

    def write(self, row):
        with self._lock:
            self._writer.writerow(row)


def _fmt(x):
    return f"{x:.6e}"


def run_experiment(grid, methods, trials=1, out=None, max_iter=20000, epsilon=None, delta=0.01):
    """Run every (instance spec, method, trial) cell.

    Parameters
    ----------
    grid : list of InstanceSpec
    methods : list of (method, variant) pairs, e.g. ``("apg", "sp")``
    trials : int
        Trial ``t`` uses instance seed ``spec.seed + t``.
    out : file object or CsvSink, optional
    max_iter : int
        Iteration cap on the first-order solver.
    epsilon : float, optional
        Surrogate shift ``epsilon``; defaults to the target accuracy
        ``1e-6``.  The Lanczos tolerance always follows ``eig_tolerance``.

    Returns
    -------
    rows, aggregates : lists of dict
        Raw rows and per-(spec, method) means; both are written to ``out``.
    """
    sink = out if isinstance(out, CsvSink) or out is None else CsvSink(out)
    rows, aggregates = [], []
    for spec in grid:
        instances = [generate(replace(spec, seed=spec.seed + t)) for t in range(trials)]
        tol = eig_tolerance(spec)
        for method, variant in methods:
            label = f"{method.upper()}({variant.upper()})"
            cell = []
            for t, inst in enumerate(instances):
                cfg = SolverConfig(max_iter=max_iter, tol=0.0, seed=spec.seed + t)
                rep = solve_crs(
                    inst.problem, method, variant,
                    epsilon=epsilon if epsilon is not None else TARGET_GAP,
                    delta=delta, cfg=cfg, eig_tol=tol,
                    target=inst.f_star + TARGET_GAP,
                )
                row = {
                    "trial": t, "method": label, "case": spec.case, "n": spec.n, "K": spec.K,
                    "param": repr(float(spec.param)),
                    "fval_opt": _fmt(rep.fval - inst.f_star),
                    "iter": rep.iterations, "matvecs": rep.matvecs,
                    "time": _fmt(rep.time), "time_eig": _fmt(rep.eig_time),
                    "status": rep.status,
                }
                cell.append((rep, row))
                rows.append(row)
                if sink is not None:
                    sink.write(row)
            agg = {
                "trial": "mean", "method": label, "case": spec.case, "n": spec.n, "K": spec.K,
                "param": repr(float(spec.param)),
                "fval_opt": _fmt(np.mean([r.fval - inst.f_star for r, _ in cell])),
                "iter": f"{np.mean([r.iterations for r, _ in cell]):.1f}",
                "matvecs": f"{np.mean([r.matvecs for r, _ in cell]):.1f}",
                "time": _fmt(np.mean([r.time for r, _ in cell])),
                "time_eig": _fmt(np.mean([r.eig_time for r, _ in cell])),
                "status": f"{sum(r.status == 'converged' for r, _ in cell)}/{len(cell)}",
            }
            aggregates.append(agg)
            if sink is not None:
                sink.write(agg)
    return rows, aggregates
