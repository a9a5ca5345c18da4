"""Cubic-regularized quadratic model and its lifted convex surrogates.

The original problem is

    min_x  f1(x) = 1/2 x^T A x + b^T x + rho/3 ||x||^3.

Lifting ``y >= ||x||^2`` and shifting the quadratic by ``s I`` gives the
family

    f(x, y) = 1/2 x^T (A + s I) x + b^T x + rho/3 y^{3/2} - s/2 y,

which is convex whenever ``A + s I`` is positive semidefinite.  The three
variants differ only in ``s`` and the lower bound placed on ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .operators import (
    SymmetricOperator,
    as_operator,
    load_dense_text,
    load_matrix_market,
    save_matrix_market,
)
from .projections import LiftedPoint

__all__ = [
    "CrsProblem",
    "SurrogateSpec",
    "make_surrogate",
    "convex_spec",
    "f1_value",
    "f1_grad",
    "lifted_value_grad",
    "lipschitz_gamma",
    "load_problem",
    "save_problem",
]

VARIANTS = ("SP", "AP", "EXACT", "RP")


@dataclass
class CrsProblem:
    A: SymmetricOperator
    b: np.ndarray
    rho: float

    def __post_init__(self):
        self.A = as_operator(self.A)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.rho = float(self.rho)
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.A.dim != self.b.shape[0]:
            raise ValueError(f"dimension mismatch: A is {self.A.dim}, b has {self.b.shape[0]}")

    @property
    def n(self):
        return self.A.dim


@dataclass(frozen=True)
class SurrogateSpec:
    """Shift ``s`` and lower bound on ``y`` for the lifted objective.

    ``SP``: ``s = -theta + eps``, bound ``s^2 / rho^2``.
    ``AP``: ``s = -theta``, bound ``theta^2 / rho^2``.
    ``EXACT``: ``s = -lambda_1`` with the true minimum eigenvalue.
    ``RP``: the convex branch, ``s = 0`` and no bound.
    """

    theta: float
    epsilon: float
    variant: str
    shift: float
    lower_bound: float


def make_surrogate(theta, epsilon, rho, variant="SP"):
    """Build the surrogate spec from an eigenvalue estimate ``theta``.

    A nonnegative ``theta`` means the quadratic is (numerically) convex and
    the plain lifted problem with ``s = 0`` is returned instead.
    """
    variant = variant.upper()
    if variant not in ("SP", "AP", "EXACT"):
        raise ValueError(f"unknown variant {variant!r}")
    theta = float(theta)
    if theta >= 0.0:
        return convex_spec(theta, epsilon)
    if variant == "SP":
        s = -theta + epsilon
    else:
        s = -theta
    return SurrogateSpec(theta, float(epsilon), variant, s, s * s / rho**2)


def convex_spec(theta=0.0, epsilon=0.0):
    return SurrogateSpec(float(theta), float(epsilon), "RP", 0.0, 0.0)


def _check_dim(prob, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (prob.n,):
        raise ValueError(f"expected vector of length {prob.n}, got shape {x.shape}")
    return x


def f1_value(prob, x, ax=None):
    x = _check_dim(prob, x)
    if ax is None:
        ax = prob.A.apply(x)
    nx = math.sqrt(float(x @ x))
    return 0.5 * float(x @ ax) + float(prob.b @ x) + prob.rho / 3.0 * nx**3


def f1_grad(prob, x, ax=None):
    x = _check_dim(prob, x)
    if ax is None:
        ax = prob.A.apply(x)
    return ax + prob.b + prob.rho * math.sqrt(float(x @ x)) * x


def _lifted_eval(prob, shift, x, y, ax):
    """Value and gradient of the lifted objective from a precomputed ``A x``.

    ``y`` below zero uses the C^1 convex extension ``max(y, 0)^{3/2}``.
    """
    yp = y if y > 0.0 else 0.0
    sqy = math.sqrt(yp)
    gx = ax + shift * x + prob.b
    val = (
        0.5 * float(x @ ax)
        + 0.5 * shift * float(x @ x)
        + float(prob.b @ x)
        + prob.rho / 3.0 * yp * sqy
        - 0.5 * shift * y
    )
    gy = 0.5 * prob.rho * sqy - 0.5 * shift
    return val, gx, gy


def lifted_value_grad(prob, spec, p):
    """Value and gradient of the lifted objective at ``p``.

    Returns ``(value, LiftedPoint(grad_x, grad_y))``; one matvec.
    """
    x = _check_dim(prob, p.x)
    if p.y < 0:
        raise ValueError("lifted objective is defined only for y >= 0")
    ax = prob.A.apply(x)
    val, gx, gy = _lifted_eval(prob, spec.shift, x, p.y, ax)
    return val, LiftedPoint(gx, gy)


def lifted_value(prob, spec, p):
    return lifted_value_grad(prob, spec, p)[0]


def lipschitz_gamma(prob, spec):
    """Upper bound on the gradient Lipschitz constant over ``y >= lower_bound``."""
    if not spec.lower_bound > 0:
        raise ValueError("gradient is not Lipschitz without a positive lower bound on y")
    shifted = prob.A.shifted(spec.shift)
    return max(shifted.norm_upper_bound(), prob.rho / (4.0 * math.sqrt(spec.lower_bound)))


def load_problem(manifest):
    """Read a problem from a ``key=value`` manifest.

    Recognized keys: ``matrix`` (Matrix Market file, or ``.txt``/``.csv``
    dense array), ``rhs`` (plain-text vector), ``rho``.  Paths are relative
    to the manifest.
    """
    manifest = Path(manifest)
    entries = {}
    for line in manifest.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    for key in ("matrix", "rhs", "rho"):
        if key not in entries:
            raise ValueError(f"manifest {manifest} lacks '{key}'")
    root = manifest.parent
    return load_problem_files(root / entries["matrix"], root / entries["rhs"], float(entries["rho"]))


def load_problem_files(matrix, rhs, rho):
    matrix = Path(matrix)
    if matrix.suffix in (".mtx", ".mm"):
        A = load_matrix_market(matrix)
    else:
        A = load_dense_text(matrix)
    b = np.loadtxt(rhs, ndmin=1)
    return CrsProblem(A, b, rho)


def save_problem(directory, prob, stem="problem"):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_matrix_market(directory / f"{stem}.mtx", prob.A)
    np.savetxt(directory / f"{stem}_b.txt", prob.b, fmt="%.17g")
    manifest = directory / f"{stem}.crs"
    manifest.write_text(f"matrix={stem}.mtx\nrhs={stem}_b.txt\nrho={prob.rho!r}\n")
    return manifest
