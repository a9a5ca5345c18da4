"""First-order solvers on the lifted problem and recovery of a CRS solution.

``apg_solve`` is accelerated projected gradient with backtracking,
function-value restart and a final reset of the ``y`` coordinate;
``bbm_solve`` is projected gradient with alternating Barzilai-Borwein
steps and an Armijo line search.  Both run on flat vectors internally and
touch the matrix once per objective evaluation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .eigmin import lanczos_min_eig
from .model import _lifted_eval, f1_value, make_surrogate
from .operators import as_operator
from .projections import LiftedPoint, project_xy

__all__ = [
    "SolverConfig",
    "InnerResult",
    "SolveReport",
    "apg_solve",
    "bbm_solve",
    "recover_solution",
    "solve_crs",
    "cauchy_point",
    "cubic_model_value",
    "dense_oracle_solve",
    "REPORT_COLUMNS",
]

ARMIJO_C = 1e-4
BB_MIN, BB_MAX = 1e-10, 1e10
BOUNDARY_RTOL = 1e-10


@dataclass
class SolverConfig:
    max_iter: int = 10000
    tol: float = 1e-7
    xi: float = 2.0
    L0: float = 1.0
    restart: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.xi > 1:
            raise ValueError("xi must exceed 1")
        if not self.L0 > 0:
            raise ValueError("L0 must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


@dataclass
class InnerResult:
    """Outcome of one first-order run on a lifted (or plain) objective."""

    point: LiftedPoint
    fval: float
    iterations: int
    status: str
    residual: float
    reset: tuple = None
    history: list = field(default_factory=list, repr=False)


REPORT_COLUMNS = ["method", "variant", "n", "fval", "iter", "matvecs", "time", "time_eig"]


@dataclass
class SolveReport:
    x: np.ndarray
    fval: float
    iterations: int
    matvecs: int
    eig_time: float
    loop_time: float
    status: str
    method: str = ""
    variant: str = ""
    theta: float = math.nan
    eig_iterations: int = 0
    inner: InnerResult = field(default=None, repr=False)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def time(self):
        return self.eig_time + self.loop_time

    def csv_row(self):
        return {
            "method": self.method,
            "variant": self.variant,
            "n": self.n,
            "fval": repr(self.fval),
            "iter": self.iterations,
            "matvecs": self.matvecs,
            "time": f"{self.time:.6e}",
            "time_eig": f"{self.eig_time:.6e}",
        }


# --------------------------------------------------------------------------
# objectives on flat vectors


class _LiftedObjective:
    """Lifted objective on ``z = (x, y)`` with projection onto ``B(l)``."""

    def __init__(self, prob, spec):
        self.prob = prob
        self.spec = spec
        self.n = prob.n

    def start(self, p):
        return np.append(np.asarray(p.x, dtype=float), float(p.y))

    def evaluate(self, z):
        x = z[:-1]
        ax = self.prob.A.apply(x)
        val, gx, gy = _lifted_eval(self.prob, self.spec.shift, x, z[-1], ax)
        return val, np.append(gx, gy), ax

    def project(self, z):
        x, y = project_xy(z[:-1], z[-1], self.spec.lower_bound)
        out = np.empty_like(z)
        out[:-1] = x
        out[-1] = y
        return out

    def _y_part(self, y):
        return self.prob.rho / 3.0 * y**1.5 - 0.5 * self.spec.shift * y

    def finalize(self, z, f):
        """Reset ``y`` down to ``max(||x||^2, s^2/rho^2)`` when that cannot hurt."""
        x, y = z[:-1], z[-1]
        xsq = float(x @ x)
        s = self.spec.shift
        rho = self.prob.rho
        if y > xsq and math.sqrt(y) > s / rho:
            y_new = max(xsq, (s / rho) ** 2)
            f_new = f - self._y_part(y) + self._y_part(y_new)
            z = z.copy()
            z[-1] = y_new
            return z, f_new, (f, f_new)
        return z, f, None

    def to_point(self, z):
        return LiftedPoint(z[:-1].copy(), float(z[-1]))


class _PlainObjective:
    """The cubic model ``f1`` itself (unconstrained)."""

    def __init__(self, prob):
        self.prob = prob

    def start(self, x):
        return np.array(x, dtype=float)

    def evaluate(self, z):
        ax = self.prob.A.apply(z)
        nz = math.sqrt(float(z @ z))
        val = 0.5 * float(z @ ax) + float(self.prob.b @ z) + self.prob.rho / 3.0 * nz**3
        return val, ax + self.prob.b + self.prob.rho * nz * z, ax

    def project(self, z):
        return z

    def finalize(self, z, f):
        return z, f, None

    def to_point(self, z):
        return z.copy()


def _residual(obj, z, g):
    return float(np.linalg.norm(z - obj.project(z - g)))


def _converged(obj, z, g, tol):
    r = _residual(obj, z, g)
    return r <= tol * max(1.0, float(np.linalg.norm(g))), r


def _finish(obj, z, f, k, status, r, history):
    z, f, reset = obj.finalize(z, f)
    return InnerResult(obj.to_point(z), f, k, status, r, reset, history)


def _apg(obj, z0, cfg, stop=None):
    z = obj.project(obj.start(z0))
    f, g, ax = obj.evaluate(z)
    history = [f]
    if not math.isfinite(f):
        return _finish(obj, z, f, 0, "degenerate", math.nan, history)
    done, r = _converged(obj, z, g, cfg.tol)
    if done or (stop is not None and stop(z, ax)):
        return _finish(obj, z, f, 0, "converged", r, history)

    alpha, f_alpha, g_alpha = z, f, g
    beta, f_beta, g_beta = z, f, g
    t = 1.0
    L = cfg.L0
    status = "max_iter"
    k = 0
    for k in range(1, cfg.max_iter + 1):
        if beta is not alpha:
            f_beta, g_beta, _ = obj.evaluate(beta)
        slack = 10.0 * np.finfo(float).eps * max(1.0, abs(f_beta))
        while True:
            cand = obj.project(beta - g_beta / L)
            d = cand - beta
            f_c, g_c, ax_c = obj.evaluate(cand)
            dd = float(d @ d)
            if dd == 0.0 or (
                math.isfinite(f_c) and f_c <= f_beta + float(g_beta @ d) + 0.5 * L * dd + slack
            ):
                break
            if not math.isfinite(f_c) and L > 1e300:
                break
            L *= cfg.xi
        if not math.isfinite(f_c):
            return _finish(obj, alpha, f_alpha, k, "degenerate", math.nan, history)

        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if cfg.restart and f_c > f_alpha:
            t = 1.0
            beta = cand
            f_beta, g_beta = f_c, g_c
        else:
            beta = cand + ((t - 1.0) / t_next) * (cand - alpha)
            t = t_next
        alpha, f_alpha, g_alpha = cand, f_c, g_c
        if beta is cand:
            beta = alpha
        history.append(f_alpha)

        done, r = _converged(obj, alpha, g_alpha, cfg.tol)
        if done or (stop is not None and stop(alpha, ax_c)):
            status = "converged"
            break
    else:
        r = _residual(obj, alpha, g_alpha)
    return _finish(obj, alpha, f_alpha, k, status, r, history)


def _bbm(obj, z0, cfg, stop=None):
    z = obj.project(obj.start(z0))
    f, g, ax = obj.evaluate(z)
    history = [f]
    if not math.isfinite(f):
        return _finish(obj, z, f, 0, "degenerate", math.nan, history)
    done, r = _converged(obj, z, g, cfg.tol)
    if done or (stop is not None and stop(z, ax)):
        return _finish(obj, z, f, 0, "converged", r, history)

    step = min(max(1.0 / cfg.L0, BB_MIN), BB_MAX)
    status = "max_iter"
    k = 0
    for k in range(1, cfg.max_iter + 1):
        lam = step
        while True:
            cand = obj.project(z - lam * g)
            d = cand - z
            gd = float(g @ d)
            f_c, g_c, ax_c = obj.evaluate(cand)
            if math.isfinite(f_c) and f_c <= f + ARMIJO_C * gd:
                break
            lam *= 0.5
            if lam < 1e-20 or not np.any(d):
                break
        if not math.isfinite(f_c):
            return _finish(obj, z, f, k, "degenerate", math.nan, history)
        if f_c > f:
            # line search exhausted without decrease: keep the current point
            r = _residual(obj, z, g)
            status = "stalled"
            break

        s = cand - z
        yv = g_c - g
        z, f, g = cand, f_c, g_c
        history.append(f)
        done, r = _converged(obj, z, g, cfg.tol)
        if done or (stop is not None and stop(z, ax_c)):
            status = "converged"
            break

        sy = float(s @ yv)
        if sy > 0.0:
            step = sy / float(yv @ yv) if k % 2 else float(s @ s) / sy
        else:
            ny = float(np.linalg.norm(yv))
            step = float(np.linalg.norm(s)) / ny if ny > 0 else BB_MAX
        step = min(max(step, BB_MIN), BB_MAX)
    else:
        r = _residual(obj, z, g)
    return _finish(obj, z, f, k, status, r, history)


def _lifted_start(spec, start):
    if isinstance(start, LiftedPoint):
        return start
    x = np.asarray(start, dtype=float)
    return LiftedPoint(x, max(float(x @ x), spec.lower_bound))


def apg_solve(prob, spec, start, cfg=None, stop=None):
    """Accelerated projected gradient on the lifted objective.

    Parameters
    ----------
    prob : CrsProblem
    spec : SurrogateSpec
    start : LiftedPoint
        Projected onto the feasible set if infeasible.
    cfg : SolverConfig
    stop : callable, optional
        ``stop(z, ax) -> bool`` evaluated at each accepted iterate
        ``z = (x, y)`` with ``ax = A x``; ends the run early when true.

    Returns
    -------
    InnerResult
        ``reset`` holds ``(f_before, f_after)`` if the final ``y`` reset
        fired.
    """
    cfg = cfg or SolverConfig()
    return _apg(_LiftedObjective(prob, spec), _lifted_start(spec, start), cfg, stop)


def bbm_solve(prob, spec, start, cfg=None, stop=None):
    """Projected Barzilai-Borwein on the lifted objective (same contract as ``apg_solve``)."""
    cfg = cfg or SolverConfig()
    return _bbm(_LiftedObjective(prob, spec), _lifted_start(spec, start), cfg, stop)


def apg_plain(prob, x0, cfg=None, stop=None):
    """APG on ``f1`` directly (no lifting, no projection)."""
    cfg = cfg or SolverConfig()
    return _apg(_PlainObjective(prob), x0, cfg, stop)


def bbm_plain(prob, x0, cfg=None, stop=None):
    """Barzilai-Borwein with Armijo decrease on ``f1`` directly."""
    cfg = cfg or SolverConfig()
    return _bbm(_PlainObjective(prob), x0, cfg, stop)


# --------------------------------------------------------------------------
# recovery


def _boundary_step(x, y, v, c):
    """Step ``t`` with ``||x + t v||^2 = y`` and ``t * c <= 0`` (``t >= 0`` on ties)."""
    xsq = float(x @ x)
    if abs(xsq - y) <= BOUNDARY_RTOL * max(1.0, y):
        return 0.0
    xv = float(x @ v)
    vv = float(v @ v)
    disc = xv * xv - vv * (xsq - y)
    if disc < 0.0:
        raise RuntimeError("recovery failed: lifted point is not feasible (||x||^2 > y)")
    root = math.sqrt(disc)
    # roots (-xv +/- root)/vv have opposite signs; evaluate each stably
    if xv >= 0.0:
        t_neg = (-xv - root) / vv
        t_pos = (xsq - y) / (vv * t_neg) if t_neg != 0.0 else root / vv
    else:
        t_pos = (-xv + root) / vv
        t_neg = (xsq - y) / (vv * t_pos) if t_pos != 0.0 else -root / vv
    return t_neg if c > 0.0 else t_pos


def recover_solution(prob, spec, p, v, av=None):
    """Map a feasible lifted point back to a CRS candidate.

    Returns ``x`` unchanged if ``||x||^2 = y``; otherwise moves along the
    approximate eigenvector ``v`` to the sphere ``||x + t v||^2 = y``,
    picking the root with ``t (v^T A x + b^T v + s x^T v) <= 0``.  Pass
    ``av = A v`` to avoid a matvec.
    """
    x = np.asarray(p.x, dtype=float)
    y = float(p.y)
    v = np.asarray(v, dtype=float)
    xsq = float(x @ x)
    if abs(xsq - y) <= BOUNDARY_RTOL * max(1.0, y):
        return x.copy()
    if av is None:
        av = prob.A.apply(v)
    c = float(av @ x) + float(prob.b @ v) + spec.shift * float(x @ v)
    t = _boundary_step(x, y, v, c)
    return x + t * v


def _recovered_value(prob, spec, obj, z, ax, eig):
    """``f1`` at the point the pipeline would return from lifted ``z``; no matvec."""
    z, _, _ = obj.finalize(z, 0.0)
    x, y = z[:-1], z[-1]
    c = float(eig.av @ x) + float(prob.b @ eig.v) + spec.shift * float(x @ eig.v)
    t = _boundary_step(x, y, eig.v, c)
    xr = x + t * eig.v
    axr = ax + t * eig.av
    return 0.5 * float(xr @ axr) + float(prob.b @ xr) + prob.rho / 3.0 * float(xr @ xr) ** 1.5


# --------------------------------------------------------------------------
# pipeline


def solve_crs(
    prob,
    method="apg",
    variant="sp",
    epsilon=1e-6,
    delta=0.01,
    cfg=None,
    start_hint=None,
    eig_tol=None,
    target=None,
):
    """Solve the cubic regularization subproblem end to end.

    Estimates the minimum eigenpair by Lanczos (tolerance ``eig_tol``,
    default ``epsilon``), builds the surrogate for ``variant`` (or the
    plain convex lift when the estimate is nonnegative), runs ``method``
    from ``(x0, max(||x0||^2, l))`` and maps the result back.

    ``target`` adds the stopping rule ``f1(recovered) <= target``, used by
    the benchmark where the optimal value is known.
    """
    cfg = cfg or SolverConfig()
    method = method.lower()
    if method not in ("apg", "bbm"):
        raise ValueError(f"unknown method {method!r}")
    A = prob.A
    count0 = A.matvec_count

    t0 = time.perf_counter()
    eig = lanczos_min_eig(A, eig_tol or epsilon, delta, seed=cfg.seed)
    t1 = time.perf_counter()

    spec = make_surrogate(eig.theta, epsilon, prob.rho, variant)
    x0 = np.zeros(prob.n) if start_hint is None else np.asarray(start_hint, dtype=float)
    start = LiftedPoint(x0, max(float(x0 @ x0), spec.lower_bound))

    stop = None
    if target is not None:
        obj = _LiftedObjective(prob, spec)

        def stop(z, ax):
            return _recovered_value(prob, spec, obj, z, ax, eig) <= target

    solver = apg_solve if method == "apg" else bbm_solve
    inner = solver(prob, spec, start, cfg, stop=stop)
    x = recover_solution(prob, spec, inner.point, eig.v, av=eig.av)
    fval = f1_value(prob, x)
    t2 = time.perf_counter()

    status = inner.status
    if not math.isfinite(fval):
        status = "degenerate"
    return SolveReport(
        x=x,
        fval=fval,
        iterations=inner.iterations,
        matvecs=A.matvec_count - count0,
        eig_time=t1 - t0,
        loop_time=t2 - t1,
        status=status,
        method=method.upper(),
        variant=spec.variant if spec.variant == "RP" else variant.upper(),
        theta=eig.theta,
        eig_iterations=eig.iterations,
        inner=inner,
    )


# --------------------------------------------------------------------------
# cubic model helpers


def cubic_model_value(B, g, sigma, s, bs=None):
    """``m(s) = 1/2 s^T B s + g^T s + sigma/3 ||s||^3``."""
    if bs is None:
        bs = B.apply(s)
    return 0.5 * float(s @ bs) + float(g @ s) + sigma / 3.0 * float(s @ s) ** 1.5


def cauchy_point(B, g, sigma):
    """Minimizer of the cubic model along ``-g`` over nonnegative step lengths.

    Solves ``sigma ||g||^3 a^2 + (g^T B g) a - ||g||^2 = 0`` for its
    nonnegative root; one matvec.
    """
    g = np.asarray(g, dtype=float)
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        raise ValueError("Cauchy point undefined for a zero gradient")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    B = as_operator(B)
    q = float(g @ B.apply(g))
    disc = math.sqrt(q * q + 4.0 * sigma * gn**5)
    if q >= 0.0:
        a = 2.0 * gn**2 / (q + disc)
    else:
        a = (-q + disc) / (2.0 * sigma * gn**3)
    return -a * g


# --------------------------------------------------------------------------
# dense reference solution


def dense_oracle_solve(prob, max_dim=500):
    """Global minimizer of ``f1`` via a full eigendecomposition.

    Solves ``||x(lam)|| = lam / rho`` with ``x(lam) = -(A + lam I)^+ b`` on
    ``lam >= max(0, -lambda_1)``; in the hard case sets ``lam = -lambda_1``
    and adds the needed multiple of the bottom eigenvector.

    Returns
    -------
    x : ndarray
    fval : float
    """
    n = prob.n
    if n > max_dim:
        raise ValueError(f"dense oracle limited to n <= {max_dim}")
    a = prob.A.to_dense()
    lam, vecs = np.linalg.eigh(a)
    beta = vecs.T @ prob.b
    rho = prob.rho
    lam1 = float(lam[0])
    scale = max(1.0, float(np.max(np.abs(lam))))
    lo = max(0.0, -lam1)
    bnorm = float(np.linalg.norm(prob.b))

    if bnorm == 0.0:
        if lam1 >= 0.0:
            x = np.zeros(n)
        else:
            x = (-lam1 / rho) * vecs[:, 0]
        return x, _dense_f1(a, prob.b, rho, x)

    def coeffs(mu):
        return -beta / (lam + mu)

    def psi(mu):
        return float(np.linalg.norm(coeffs(mu))) - mu / rho

    left = lo + 1e-14 * scale
    if lam1 < 0.0 and psi(left) <= 0.0:
        # hard case: the pseudo-inverse solution at lo already fits inside the
        # sphere; fill up along the bottom eigenspace
        bottom = np.abs(lam - lam1) <= 1e-12 * scale
        c = np.zeros(n)
        c[~bottom] = -beta[~bottom] / (lam[~bottom] + lo)
        tsq = (lo / rho) ** 2 - float(c @ c)
        j = int(np.flatnonzero(bottom)[np.argmax(np.abs(beta[bottom]))])
        c[j] = (-1.0 if beta[j] > 0 else 1.0) * math.sqrt(max(tsq, 0.0))
        x = vecs @ c
        return x, _dense_f1(a, prob.b, rho, x)

    right = max(left, 1.0)
    while psi(right) > 0.0:
        right *= 2.0
    mu = brentq(psi, left, right, xtol=1e-15 * max(1.0, right), rtol=4 * np.finfo(float).eps, maxiter=500)
    x = vecs @ coeffs(mu)
    return x, _dense_f1(a, prob.b, rho, x)


def _dense_f1(a, b, rho, x):
    return 0.5 * float(x @ a @ x) + float(b @ x) + rho / 3.0 * float(np.linalg.norm(x)) ** 3
