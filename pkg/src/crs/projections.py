"""Exact projections onto the lifted feasible sets.

``S = {(x, y) : ||x||^2 <= y}`` and ``B(l) = S  ∩ {y >= l}``.  Projecting
onto ``S`` reduces to one univariate cubic in the multiplier ``mu``; the
root lies in ``[max(0, -2 y0), inf)`` where the cubic is increasing with
slope at least 1/2, so a safeguarded Newton iteration always converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LiftedPoint",
    "cubic_mu_root",
    "cubic_residual",
    "project_S",
    "project_Bhat",
    "project_xy",
]

BRACKET_ULPS = 4


@dataclass
class LiftedPoint:
    """A pair ``(x, y)`` where ``y`` stands in for ``||x||^2``."""

    x: np.ndarray
    y: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = float(self.y)

    @property
    def dim(self):
        return self.x.shape[0]

    def as_vector(self):
        return np.append(self.x, self.y)

    @classmethod
    def from_vector(cls, z):
        z = np.asarray(z, dtype=float)
        return cls(z[:-1].copy(), float(z[-1]))

    def copy(self):
        return LiftedPoint(self.x.copy(), self.y)


def _h(mu, xsq, y0):
    # (1 + mu)^2 (y0 + mu/2) - ||x0||^2, the cubic in factored form
    return (1.0 + mu) ** 2 * (y0 + 0.5 * mu) - xsq


def _dh(mu, y0):
    return (1.0 + mu) * (2.0 * y0 + mu) + 0.5 * (1.0 + mu) ** 2


def cubic_residual(mu, x0_norm_sq, y0):
    """``h(mu) = mu^3/2 + (y0+1) mu^2 + (2 y0 + 1/2) mu - ||x0||^2 + y0``."""
    return 0.5 * mu**3 + (y0 + 1.0) * mu**2 + (2.0 * y0 + 0.5) * mu - x0_norm_sq + y0


def cubic_mu_root(x0_norm_sq, y0, max_iter=200):
    """Root of the projection cubic on ``[max(0, -2 y0), inf)``.

    Newton steps are taken from the current iterate and replaced by a
    bisection step whenever they leave the bracket or fail to shrink
    ``|h|``.  Iteration continues until ``h`` vanishes or the bracket
    spans a few ulps, so the result is as accurate as double precision
    evaluation of ``h`` allows.

    Raises
    ------
    ValueError
        If ``x0_norm_sq <= y0`` (the point is already in ``S``).
    """
    xsq = float(x0_norm_sq)
    y0 = float(y0)
    if not xsq > y0:
        raise ValueError("cubic_mu_root needs an infeasible point (||x0||^2 > y0)")

    a = max(0.0, -2.0 * y0)
    ha = _h(a, xsq, y0)
    if ha >= 0.0:
        return a
    b = a + 1.0
    hb = _h(b, xsq, y0)
    while hb <= 0.0:
        a, ha = b, hb
        b = 2.0 * b + 1.0
        hb = _h(b, xsq, y0)

    # start from the secant point, then polish until the bracket collapses
    mu = a - ha * (b - a) / (hb - ha)
    hmu = _h(mu, xsq, y0)
    for _ in range(max_iter):
        if hmu == 0.0:
            break
        if hmu < 0.0:
            a, ha = mu, hmu
        else:
            b, hb = mu, hmu
        if b - a <= BRACKET_ULPS * math.ulp(b):
            break
        cand = mu - hmu / _dh(mu, y0)
        if a < cand < b:
            hcand = _h(cand, xsq, y0)
            if abs(hcand) < abs(hmu):
                mu, hmu = cand, hcand
                continue
        mu = 0.5 * (a + b)
        hmu = _h(mu, xsq, y0)
    # the bracket ends straddle the root; keep the smallest residual
    return min((abs(hmu), mu), (abs(ha), a), (abs(hb), b))[1]


def project_xy(x0, y0, lower=0.0):
    """Projection of ``(x0, y0)`` onto ``B(lower)`` on raw arrays.

    Returns ``(x, y)``; the input array is never modified.
    """
    xsq = float(np.dot(x0, x0))
    if xsq <= y0:
        x1, y1 = x0, float(y0)
    else:
        mu = cubic_mu_root(xsq, y0)
        x1 = x0 / (1.0 + mu)
        y1 = y0 + 0.5 * mu
    if lower <= 0.0 or y1 >= lower:
        return x1, y1
    r = math.sqrt(xsq)
    root_l = math.sqrt(lower)
    if r < root_l:
        return x0, float(lower)
    return (root_l / r) * x0, float(lower)


def project_S(p):
    """Euclidean projection onto ``{(x, y) : ||x||^2 <= y}``."""
    x, y = project_xy(p.x, p.y, 0.0)
    return LiftedPoint(np.array(x, copy=True), y)


def project_Bhat(p, l):
    """Euclidean projection onto ``{(x, y) : ||x||^2 <= y, y >= l}``."""
    if l < 0:
        raise ValueError("lower bound l must be nonnegative")
    x, y = project_xy(p.x, p.y, float(l))
    return LiftedPoint(np.array(x, copy=True), y)
