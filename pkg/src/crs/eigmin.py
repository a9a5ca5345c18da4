"""Lanczos estimate of the minimum eigenvalue of a symmetric operator.

The iteration runs on ``U I - A`` (``U`` an upper bound on ``||A||``),
whose largest eigenvalue corresponds to the smallest eigenvalue of ``A``.
The basis is fully reorthogonalized and the tridiagonal eigenproblem is
solved by Sturm-sequence bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .operators import ShiftedOperator

__all__ = ["EigEstimate", "lanczos_min_eig", "lanczos_iteration_cap", "tridiag_max_eig"]


@dataclass
class EigEstimate:
    """Approximate minimum eigenpair.

    ``theta`` is the Rayleigh quotient of ``v``; ``av`` caches ``A v`` so
    callers can reuse it without another matvec.
    """

    theta: float
    v: np.ndarray
    iterations: int
    epsilon: float
    residual: float = math.nan
    cap: int = 0
    av: np.ndarray = field(default=None, repr=False)


def lanczos_iteration_cap(n, bound, epsilon, delta):
    """``min{n, ceil(log(n / delta^2) / (2 sqrt 2) * sqrt(U / eps))}``."""
    k = math.log(n / delta**2) / (2.0 * math.sqrt(2.0)) * math.sqrt(bound / epsilon)
    return int(min(n, math.ceil(k)))


def _sturm_count(alpha, beta2, x):
    """Number of eigenvalues of the tridiagonal (alpha, beta) below ``x``."""
    count = 0
    q = 1.0
    tiny = 1e-300
    prev_b2 = 0.0
    for a, b2 in zip(alpha, beta2):
        q = a - x - prev_b2 / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
        prev_b2 = b2
    return count


def tridiag_max_eig(alpha, beta, lo=None, hi=None):
    """Largest eigenvalue of a symmetric tridiagonal matrix by bisection.

    ``alpha`` is the diagonal, ``beta`` the off-diagonal (length k-1).
    ``lo``/``hi`` optionally bracket the eigenvalue.
    """
    alpha = [float(a) for a in alpha]
    k = len(alpha)
    beta2 = [float(b) ** 2 for b in beta] + [0.0]
    if hi is None or lo is None:
        babs = np.abs(np.asarray(beta, dtype=float))
        rad = np.zeros(k)
        rad[:-1] += babs
        rad[1:] += babs
        g_lo = float(np.min(np.asarray(alpha) - rad))
        g_hi = float(np.max(np.asarray(alpha) + rad))
        lo = g_lo if lo is None else lo
        hi = g_hi if hi is None else hi
    scale = max(abs(lo), abs(hi), 1e-300)
    while hi - lo > 2.0 * np.finfo(float).eps * scale:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(alpha, beta2, mid) == k:
            hi = mid
        else:
            lo = mid
    return hi


def _tridiag_eigvec(alpha, beta, lam):
    """Unit eigenvector of the tridiagonal for eigenvalue ``lam`` (inverse iteration)."""
    k = len(alpha)
    if k == 1:
        return np.ones(1)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    scale = max(np.max(np.abs(alpha)), np.max(np.abs(beta)) if k > 1 else 0.0, 1.0)
    shift = lam + 1e-13 * scale
    ab = np.zeros((3, k))
    ab[0, 1:] = beta
    ab[1, :] = alpha - shift
    ab[2, :-1] = beta
    s = np.ones(k) / math.sqrt(k)
    for _ in range(3):
        try:
            s = solve_banded((1, 1), ab, s, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            ab[1, :] -= 1e-10 * scale
            continue
        nrm = np.linalg.norm(s)
        if not np.isfinite(nrm) or nrm == 0.0:
            s = np.ones(k) / math.sqrt(k)
            ab[1, :] -= 1e-10 * scale
            continue
        s /= nrm
    return s


def lanczos_min_eig(op, epsilon, delta=0.01, seed=0, max_iter=None):
    """Estimate ``lambda_min(op)`` to accuracy ``epsilon`` with probability ``1 - delta``.

    Parameters
    ----------
    op : SymmetricOperator
    epsilon : float
        Target accuracy; also the Ritz-residual early-exit threshold
        (``||A v - theta v|| <= epsilon * max(1, |theta|)``).
    delta : float
        Failure probability in (0, 1); enters the iteration cap.
    seed : int
        Seed for the random starting vector.
    max_iter : int, optional
        Overrides the iteration cap (never beyond ``n``).

    Returns
    -------
    EigEstimate
        ``theta`` is the Rayleigh quotient ``v^T A v`` of the returned unit
        vector, so ``theta >= lambda_min`` always.  The run costs
        ``iterations + 1`` matvecs on ``op``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    n = op.dim
    if n <= 0:
        raise ValueError("empty operator")

    bound = op.norm_upper_bound()
    if bound == 0.0:
        v = np.zeros(n)
        v[0] = 1.0
        av = op.apply(v)
        return EigEstimate(0.0, v, 0, epsilon, 0.0, 0, av)
    cap = lanczos_iteration_cap(n, bound, epsilon, delta)
    if max_iter is not None:
        cap = int(min(n, max_iter))
    cap = max(cap, 1)

    # Lanczos on M = U I - A; largest Ritz value phi gives theta = U - phi.
    shifted = ShiftedOperator(op, -bound)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)

    basis = np.empty((cap, n))
    alpha = []
    beta = []
    phi = None
    s = None
    resid = math.inf
    breakdown_tol = 1e-14 * bound
    k = 0
    while k < cap:
        basis[k] = q
        w = -shifted.apply(q)
        a = float(q @ w)
        w -= a * q
        if k > 0:
            w -= beta[-1] * basis[k - 1]
        # full reorthogonalization, twice for stability
        for _ in range(2):
            w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
        b = float(np.linalg.norm(w))
        alpha.append(a)
        k += 1

        lo = None if phi is None else phi - 1e-12 * bound
        phi = tridiag_max_eig(alpha, beta, lo=lo)
        s = _tridiag_eigvec(alpha, beta, phi)
        resid = abs(b * s[-1])
        theta_ritz = bound - phi
        if b <= breakdown_tol or resid <= epsilon * max(1.0, abs(theta_ritz)):
            break
        beta.append(b)
        q = w / b

    v = basis[:k].T @ s
    v /= np.linalg.norm(v)
    av = op.apply(v)
    theta = float(v @ av)
    residual = float(np.linalg.norm(av - theta * v))
    return EigEstimate(theta, v, k, float(epsilon), residual, cap, av)
