"""Adaptive cubic regularization with a lifted-reformulation subproblem switch.

Each outer iteration builds the model

    m_k(s) = 1/2 s^T B_k s + g_k^T s + sigma_k/3 ||s||^3

and solves it approximately from the Cauchy point.  When the gradient is
small relative to ``F`` and ``B_k`` has a clearly negative eigenvalue the
model is handed to the lifted (AP) solver, which handles the nonconvex
case; otherwise Barzilai-Borwein runs on the model directly.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .eigmin import lanczos_min_eig
from .model import CrsProblem, make_surrogate
from .operators import as_operator
from .projections import LiftedPoint
from .solvers import (
    SolverConfig,
    _boundary_step,
    _LiftedObjective,
    apg_solve,
    bbm_plain,
    bbm_solve,
    cauchy_point,
    cubic_model_value,
    recover_solution,
)

__all__ = [
    "ArcConfig",
    "SmoothObjective",
    "ArcHistory",
    "arc_minimize",
    "HISTORY_COLUMNS",
    "SUMMARY_COLUMNS",
    "write_history",
]

HISTORY_COLUMNS = [
    "k", "f", "gnorm", "sigma", "rho", "branch", "accepted",
    "m_trial", "m_cauchy", "inner_iters", "inner_gnorm", "inner_rule_ok",
    "n_prod", "n_f", "n_g", "n_eig", "time", "time_eig", "time_loop",
]
SUMMARY_COLUMNS = ["n_i", "n_prod", "n_f", "n_g", "n_eig", "f*", "time", "time_eig", "time_loop"]


@dataclass(frozen=True)
class ArcConfig:
    gamma1: float = 2.0
    gamma2: float = 3.0
    eta1: float = 0.1
    eta2: float = 0.9
    sigma0: float = 1.0
    eps1: float = 1e-2
    eps2: float = 1e-4
    grad_tol: float = 1e-5
    eig_tol_outer: float = 1e-3
    max_outer: int = 5000
    inner_max_iter: int = 150
    sigma_min: float = 1e-12
    delta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.gamma2 >= self.gamma1 > 1.0:
            raise ValueError("need gamma2 >= gamma1 > 1")
        if not 1.0 > self.eta2 >= self.eta1 > 0.0:
            raise ValueError("need 1 > eta2 >= eta1 > 0")
        for name in ("sigma0", "eps1", "eps2", "grad_tol", "eig_tol_outer", "sigma_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1 or self.inner_max_iter < 1:
            raise ValueError("iteration caps must be at least 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def switch_eig_tol(self):
        return min(self.eps2 / 10.0, 1e-5)


@dataclass
class SmoothObjective:
    """Value, gradient and Hessian-operator oracles of a smooth function."""

    eval_f: callable
    eval_g: callable
    eval_hess: callable


class ArcHistory(list):
    """Per-iteration records plus the final status and summary counters."""

    status = "max_outer"
    summary = None


class _Counters:
    def __init__(self):
        self.n_prod = 0
        self.n_f = 0
        self.n_g = 0
        self.n_eig = 0
        self.time_eig = 0.0


def _finite(*vals):
    return all(np.all(np.isfinite(v)) for v in vals)


def _model_grad(model, s, bs):
    return bs + model.b + model.rho * math.sqrt(float(s @ s)) * s


def _lanczos(H, tol, cfg, counters):
    t0 = time.perf_counter()
    eig = lanczos_min_eig(H, tol, cfg.delta, seed=cfg.seed)
    counters.time_eig += time.perf_counter() - t0
    counters.n_eig += 1
    return eig


def _solve_plain(model, s_c, gnorm, cfg):
    def stop(z, bz):
        gm = _model_grad(model, z, bz)
        return float(np.linalg.norm(gm)) <= min(1.0, float(np.linalg.norm(z))) * gnorm

    inner_cfg = SolverConfig(max_iter=cfg.inner_max_iter, tol=0.0, seed=cfg.seed)
    res = bbm_plain(model, s_c, inner_cfg, stop=stop)
    return res.point, res.iterations


def _solve_lifted(model, s_c, gnorm, eig, cfg, subsolver):
    spec = make_surrogate(eig.theta, 0.0, model.rho, "AP")
    obj = _LiftedObjective(model, spec)

    def stop(z, bz):
        z, _, _ = obj.finalize(z, 0.0)
        x, y = z[:-1], z[-1]
        c = float(eig.av @ x) + float(model.b @ eig.v) + spec.shift * float(x @ eig.v)
        t = _boundary_step(x, y, eig.v, c)
        s = x + t * eig.v
        gm = _model_grad(model, s, bz + t * eig.av)
        return float(np.linalg.norm(gm)) <= min(1.0, float(np.linalg.norm(s))) * gnorm

    inner_cfg = SolverConfig(max_iter=cfg.inner_max_iter, tol=0.0, seed=cfg.seed)
    solver = apg_solve if subsolver == "apg" else bbm_solve
    start = LiftedPoint(s_c, float(s_c @ s_c))
    res = solver(model, spec, start, inner_cfg, stop=stop)
    s = recover_solution(model, spec, res.point, eig.v, av=eig.av)
    return s, res.iterations


def arc_minimize(obj, x0, cfg=None, subsolver="apg"):
    """Minimize a smooth function by adaptive cubic regularization.

    Parameters
    ----------
    obj : SmoothObjective
        ``eval_hess(x)`` may return an array, sparse matrix or operator.
    x0 : array_like
    cfg : ArcConfig, optional
    subsolver : {"apg", "bbm"}
        Solver used on the lifted subproblem when the switch fires.

    Returns
    -------
    x : ndarray
    history : ArcHistory
        One dict per outer iteration (keys ``HISTORY_COLUMNS``);
        ``history.status`` is ``"converged"``, ``"max_outer"`` or
        ``"nonfinite"`` and ``history.summary`` holds the run totals.
    """
    cfg = cfg or ArcConfig()
    subsolver = subsolver.lower()
    if subsolver not in ("apg", "bbm"):
        raise ValueError(f"unknown subsolver {subsolver!r}")

    t_start = time.perf_counter()
    cnt = _Counters()
    history = ArcHistory()
    x = np.array(x0, dtype=float)
    sigma = float(cfg.sigma0)

    def evaluate(x):
        cnt.n_f += 1
        cnt.n_g += 1
        return float(obj.eval_f(x)), np.asarray(obj.eval_g(x), dtype=float)

    f, g = evaluate(x)
    H = None
    eig = None
    k = 0
    while True:
        if not _finite(f, g):
            history.status = "nonfinite"
            break
        if H is None:
            H = as_operator(obj.eval_hess(x))
            eig = None
        gnorm = float(np.linalg.norm(g))

        if gnorm <= cfg.grad_tol:
            check = _lanczos(H, cfg.eig_tol_outer / 10.0, cfg, cnt)
            if check.theta - check.epsilon >= -cfg.eig_tol_outer:
                history.status = "converged"
                break
            if eig is None or check.epsilon < eig.epsilon:
                eig = check
        if k >= cfg.max_outer:
            break
        k += 1

        model = CrsProblem(H, g, sigma)
        if gnorm > 0.0:
            s_c = cauchy_point(H, g, sigma)
        else:
            s_c = np.zeros_like(x)
        m_c = cubic_model_value(H, g, sigma, s_c)

        branch = "plain"
        if gnorm <= max(f, 1.0) * cfg.eps1:
            if eig is None or eig.epsilon > cfg.switch_eig_tol:
                eig = _lanczos(H, cfg.switch_eig_tol, cfg, cnt)
            if eig.theta < -cfg.eps2:
                branch = "lifted"
        if branch == "lifted":
            trial, inner_iters = _solve_lifted(model, s_c, gnorm, eig, cfg, subsolver)
        else:
            trial, inner_iters = _solve_plain(model, s_c, gnorm, cfg)

        bt = H.apply(trial)
        m_t = cubic_model_value(H, g, sigma, trial, bt)
        inner_gnorm = float(np.linalg.norm(_model_grad(model, trial, bt)))
        rule_ok = (
            inner_gnorm <= min(1.0, float(np.linalg.norm(trial))) * gnorm
            or inner_iters >= cfg.inner_max_iter
        )
        if _finite(m_t) and m_t <= m_c:
            s, m_s = trial, m_t
        else:
            s, m_s = s_c, m_c

        x_new = x + s
        f_new, g_new = evaluate(x_new)
        if not _finite(f_new, g_new):
            rho_k = -math.inf
        else:
            actual = f - f_new
            if -m_s > 0.0:
                rho_k = actual / (-m_s)
            else:
                rho_k = math.inf if actual > 0.0 else -math.inf
        accepted = rho_k >= cfg.eta1

        cnt.n_prod += H.matvec_count
        record = {
            "k": k, "f": f, "gnorm": gnorm, "sigma": sigma, "rho": rho_k,
            "branch": branch, "accepted": accepted, "m_trial": m_t, "m_cauchy": m_c,
            "inner_iters": inner_iters, "inner_gnorm": inner_gnorm, "inner_rule_ok": rule_ok,
        }
        if accepted:
            x, f, g = x_new, f_new, g_new
            H = None
        else:
            H.reset_count()

        if rho_k > cfg.eta2:
            sigma = max(0.5 * sigma, cfg.sigma_min)
        elif not accepted:
            sigma = cfg.gamma1 * sigma

        elapsed = time.perf_counter() - t_start
        record.update(
            n_prod=cnt.n_prod, n_f=cnt.n_f, n_g=cnt.n_g, n_eig=cnt.n_eig,
            time=elapsed, time_eig=cnt.time_eig, time_loop=elapsed - cnt.time_eig,
        )
        history.append(record)

    if H is not None:
        cnt.n_prod += H.matvec_count
    elapsed = time.perf_counter() - t_start
    history.summary = {
        "n_i": k, "n_prod": cnt.n_prod, "n_f": cnt.n_f, "n_g": cnt.n_g, "n_eig": cnt.n_eig,
        "f*": f, "time": elapsed, "time_eig": cnt.time_eig, "time_loop": elapsed - cnt.time_eig,
    }
    return x, history


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_history(fh, history, timing=True):
    """Write per-iteration rows, then a blank line and the summary row.

    ``timing=False`` drops the wall-clock columns.
    """
    drop = {"time", "time_eig", "time_loop"} if not timing else set()
    cols = [c for c in HISTORY_COLUMNS if c not in drop]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for rec in history:
        w.writerow([_cell(rec[c]) for c in cols])
    if history.summary is not None:
        scols = [c for c in SUMMARY_COLUMNS if c not in drop]
        w.writerow([])
        w.writerow(scols)
        w.writerow([_cell(history.summary[c]) for c in scols])
