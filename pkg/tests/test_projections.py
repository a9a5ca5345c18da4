import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crs.projections import (
    LiftedPoint,
    cubic_mu_root,
    cubic_residual,
    project_Bhat,
    project_S,
)

finite = st.floats(-50, 50, allow_nan=False)
vectors = st.integers(1, 6).flatmap(lambda n: arrays(float, n, elements=finite))


def _kkt_ok(p, q):
    # q = (x0/(1+mu), y0 + mu/2) with mu >= 0 and q on the boundary when mu > 0
    if p.x @ p.x <= p.y:
        return np.array_equal(q.x, p.x) and q.y == p.y
    mu = 2.0 * (q.y - p.y)
    return (
        mu >= -1e-12
        and np.allclose(q.x * (1.0 + mu), p.x, rtol=1e-9, atol=1e-9)
        and abs(q.x @ q.x - q.y) <= 1e-9 * max(1.0, q.y)
    )


def test_feasible_point_unchanged():
    p = LiftedPoint(np.array([0.3, 0.4]), 1.0)
    q = project_S(p)
    np.testing.assert_array_equal(q.x, p.x)
    assert q.y == 1.0


def test_known_projection_of_origin_with_negative_y():
    # (0, -1) projects to (0, 0): the cone apex
    q = project_S(LiftedPoint(np.zeros(3), -1.0))
    assert np.all(q.x == 0) and q.y == 0.0


def test_one_dimensional_example():
    # x0 = 2, y0 = 0: mu solves (1+mu)^2 mu/2 = 4, i.e. mu = 1.7255..; checked by substitution
    mu = cubic_mu_root(4.0, 0.0)
    assert (1 + mu) ** 2 * mu / 2 == pytest.approx(4.0, rel=1e-14)


def test_cubic_root_rejects_feasible():
    with pytest.raises(ValueError):
        cubic_mu_root(1.0, 2.0)


@given(st.floats(1e-6, 1e4), st.floats(-1e3, 1e3))
def test_cubic_root_lies_in_domain_and_brackets_sign_change(xsq, y0):
    if xsq <= y0:
        return
    mu = cubic_mu_root(xsq, y0)
    assert mu >= max(0.0, -2.0 * y0)
    lo, hi = math.nextafter(mu, -math.inf), math.nextafter(mu, math.inf)
    scale = 1e-12 * max(1.0, xsq, (1 + mu) ** 3)
    assert cubic_residual(lo, xsq, y0) <= scale
    assert cubic_residual(hi, xsq, y0) >= -scale


@settings(max_examples=200)
@given(vectors, finite)
def test_project_S_kkt_and_feasibility(x, y):
    p = LiftedPoint(x, y)
    q = project_S(p)
    assert q.x @ q.x <= q.y * (1 + 1e-12) + 1e-12
    assert _kkt_ok(p, q)


@settings(max_examples=200)
@given(vectors, finite, st.floats(0, 20))
def test_project_Bhat_idempotent_and_feasible(x, y, l):
    q = project_Bhat(LiftedPoint(x, y), l)
    assert q.y >= l
    assert q.x @ q.x <= q.y * (1 + 1e-12) + 1e-12
    r = project_Bhat(q, l)
    assert np.allclose(r.x, q.x, atol=1e-12) and abs(r.y - q.y) <= 1e-12 * max(1, q.y)


def test_project_Bhat_branches():
    # inside S but below l, short x: lift y only
    q = project_Bhat(LiftedPoint(np.array([0.1]), 0.5), 1.0)
    assert q.y == 1.0 and q.x[0] == 0.1
    # far below l with long x: radial scaling onto the sphere of radius sqrt(l)
    q = project_Bhat(LiftedPoint(np.array([3.0, 4.0]), -100.0), 4.0)
    assert q.y == 4.0
    np.testing.assert_allclose(q.x, [1.2, 1.6])


def test_project_Bhat_negative_bound():
    with pytest.raises(ValueError):
        project_Bhat(LiftedPoint(np.zeros(1), 0.0), -1.0)


def test_projection_does_not_modify_input():
    x = np.array([3.0, 4.0])
    project_Bhat(LiftedPoint(x, 0.0), 2.0)
    np.testing.assert_array_equal(x, [3.0, 4.0])


def test_lifted_point_vector_roundtrip():
    p = LiftedPoint(np.array([1.0, 2.0]), 3.0)
    q = LiftedPoint.from_vector(p.as_vector())
    np.testing.assert_array_equal(q.x, p.x)
    assert q.y == 3.0 and p.dim == 2


def _exact_sign(mu, xsq, y0):
    m, y, x = Fraction(mu), Fraction(y0), Fraction(xsq)
    return (m**3 / 2 + (y + 1) * m**2 + (2 * y + Fraction(1, 2)) * m - x + y) > 0


def test_cubic_root_within_few_ulps_of_exact_root():
    rng = np.random.default_rng(3)
    worst = 0
    for _ in range(500):
        y0 = float(rng.uniform(-1e3, 1e3))
        x = rng.standard_normal(int(rng.integers(1, 6))) * 10 ** rng.uniform(-3, 2)
        xsq = float(x @ x)
        if xsq <= y0:
            continue
        mu = cubic_mu_root(xsq, y0)
        if mu == max(0.0, -2.0 * y0):
            continue
        side = _exact_sign(mu, xsq, y0)
        direction = -math.inf if side else math.inf
        steps, m = 0, mu
        while _exact_sign(m, xsq, y0) == side and steps < 64:
            m = math.nextafter(m, direction)
            steps += 1
        worst = max(worst, steps)
    assert worst <= 16
