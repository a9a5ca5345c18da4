"""Smooth unconstrained test functions with sparse Hessians.

``rosenbrock`` is the chained (tridiagonal-Hessian) Rosenbrock function;
``humps`` is a separable-pair oscillatory function with many saddle
points, so its Hessian is frequently indefinite.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .arc import SmoothObjective
from .operators import SparseOperator

__all__ = ["rosenbrock", "rosenbrock_start", "humps", "humps_start", "get_objective"]


def _tridiag(main, off):
    return SparseOperator(sp.diags([off, main, off], [-1, 0, 1], format="csr"), check=False)


def _rosen_f(x):
    a, b = x[:-1], x[1:]
    return float(np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2))


def _rosen_g(x):
    a, b = x[:-1], x[1:]
    r = b - a * a
    g = np.zeros_like(x)
    g[:-1] += -400.0 * a * r - 2.0 * (1.0 - a)
    g[1:] += 200.0 * r
    return g


def _rosen_h(x):
    a, b = x[:-1], x[1:]
    main = np.zeros_like(x)
    main[:-1] += 1200.0 * a * a - 400.0 * b + 2.0
    main[1:] += 200.0
    return _tridiag(main, -400.0 * a)


def rosenbrock():
    return SmoothObjective(_rosen_f, _rosen_g, _rosen_h)


def rosenbrock_start(n):
    """The usual start ``(-1.2, 1, -1.2, 1, ...)``."""
    x = np.ones(n)
    x[0::2] = -1.2
    return x


def _humps_f(x):
    a, b = x[:-1], x[1:]
    return float(np.sum(np.sin(2 * a) ** 2 * np.sin(2 * b) ** 2 + 0.05 * (a * a + b * b)))


def _humps_g(x):
    a, b = x[:-1], x[1:]
    sa, sb = np.sin(2 * a) ** 2, np.sin(2 * b) ** 2
    g = np.zeros_like(x)
    g[:-1] += 2.0 * np.sin(4 * a) * sb + 0.1 * a
    g[1:] += 2.0 * np.sin(4 * b) * sa + 0.1 * b
    return g


def _humps_h(x):
    a, b = x[:-1], x[1:]
    sa, sb = np.sin(2 * a) ** 2, np.sin(2 * b) ** 2
    main = np.zeros_like(x)
    main[:-1] += 8.0 * np.cos(4 * a) * sb + 0.1
    main[1:] += 8.0 * np.cos(4 * b) * sa + 0.1
    return _tridiag(main, 4.0 * np.sin(4 * a) * np.sin(4 * b))


def humps():
    return SmoothObjective(_humps_f, _humps_g, _humps_h)


def humps_start(n, scale=1.0):
    """Alternating start ``(-s, s, -s, ...)`` with ``s = 5.062 * scale``."""
    x = np.full(n, 5.062 * scale)
    x[0::2] *= -1.0
    return x


_REGISTRY = {
    "rosenbrock": (rosenbrock, rosenbrock_start),
    "humps": (humps, humps_start),
}


def get_objective(name, n):
    """``(objective, start)`` for a registered test function."""
    try:
        make, start = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown objective {name!r}; choose from {sorted(_REGISTRY)}") from None
    if n < 2:
        raise ValueError("dimension must be at least 2")
    return make(), start(n)
