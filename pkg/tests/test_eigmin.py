import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crs.eigmin import lanczos_iteration_cap, lanczos_min_eig, tridiag_max_eig
from crs.operators import DenseOperator, SparseOperator, identity
import scipy.sparse as sp


def test_identity_exact():
    est = lanczos_min_eig(identity(10), 1e-8)
    assert est.theta == pytest.approx(1.0, abs=1e-14)
    assert est.iterations == 1


def test_diagonal_small():
    est = lanczos_min_eig(DenseOperator(np.diag([-1.0, 0.0, 2.0])), 1e-10)
    assert est.theta == pytest.approx(-1.0, abs=1e-12)
    assert abs(est.v[0]) == pytest.approx(1.0, abs=1e-6)


def test_zero_operator():
    est = lanczos_min_eig(DenseOperator(np.zeros((3, 3))), 1e-3)
    assert est.theta == 0.0


def test_matvec_count_is_iterations_plus_one():
    a = np.random.default_rng(1).standard_normal((30, 30))
    op = DenseOperator(a + a.T)
    est = lanczos_min_eig(op, 1e-6, seed=3)
    assert op.matvec_count == est.iterations + 1
    np.testing.assert_allclose(est.av, op.to_dense() @ est.v, atol=1e-12)


def test_cap_formula():
    k = math.log(100 / 0.1**2) / (2 * math.sqrt(2)) * math.sqrt(4.0 / 1e-4)
    assert lanczos_iteration_cap(100, 4.0, 1e-4, 0.1) == min(100, math.ceil(k))
    assert lanczos_iteration_cap(10**6, 1.0, 1.0, 0.5) == math.ceil(math.log(4e6) / (2 * math.sqrt(2)))


def test_bad_arguments():
    with pytest.raises(ValueError):
        lanczos_min_eig(identity(2), 0.0)
    with pytest.raises(ValueError):
        lanczos_min_eig(identity(2), 1e-3, delta=1.0)


def test_deterministic_for_seed():
    a = np.random.default_rng(5).standard_normal((40, 40))
    op = DenseOperator(a + a.T)
    e1 = lanczos_min_eig(op, 1e-5, seed=11)
    e2 = lanczos_min_eig(op, 1e-5, seed=11)
    assert e1.theta == e2.theta and np.array_equal(e1.v, e2.v)


def test_sparse_laplacian():
    n = 200
    lap = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")
    est = lanczos_min_eig(SparseOperator(lap), 1e-6, max_iter=n)
    exact = 2 - 2 * math.cos(math.pi / (n + 1))
    assert exact - 1e-14 <= est.theta <= exact + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 25), st.integers(0, 10**6))
def test_rayleigh_quotient_never_below_min(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = a + a.T
    est = lanczos_min_eig(DenseOperator(a), 1e-6, seed=seed, max_iter=n)
    lam = np.linalg.eigvalsh(a)[0]
    assert est.theta >= lam - 1e-12 * max(1.0, abs(lam))
    assert est.theta <= lam + 1e-5 * max(1.0, abs(lam))


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.integers(0, 1000))
def test_tridiag_max_matches_eigh(alpha, seed):
    k = len(alpha)
    beta = np.random.default_rng(seed).uniform(-3, 3, k - 1)
    t = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
    assert tridiag_max_eig(alpha, beta) == pytest.approx(np.linalg.eigvalsh(t)[-1], abs=1e-12 * max(1, np.abs(t).max()))
