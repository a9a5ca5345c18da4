import numpy as np
import pytest

from crs.model import (
    CrsProblem,
    convex_spec,
    f1_grad,
    f1_value,
    lifted_value_grad,
    lipschitz_gamma,
    load_problem,
    make_surrogate,
    save_problem,
)
from crs.operators import DenseOperator
from crs.projections import LiftedPoint


def _prob(n=4, seed=0, rho=2.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return CrsProblem(DenseOperator(a + a.T), rng.standard_normal(n), rho)


def test_problem_validation():
    with pytest.raises(ValueError):
        CrsProblem(np.eye(2), np.ones(2), 0.0)
    with pytest.raises(ValueError):
        CrsProblem(np.eye(2), np.ones(3), 1.0)


def test_f1_known_value():
    prob = CrsProblem(np.diag([1.0, -1.0]), np.array([1.0, 0.0]), 3.0)
    x = np.array([1.0, 1.0])
    # 1/2 (1 - 1) + 1 + 3/3 * 2^{3/2}
    assert f1_value(prob, x) == pytest.approx(1 + 2**1.5)
    np.testing.assert_allclose(f1_grad(prob, x), [1 + 1 + 3 * 2**0.5, -1 + 3 * 2**0.5])


def test_surrogate_shifts():
    sp_ = make_surrogate(-2.0, 0.1, 2.0, "SP")
    assert sp_.shift == pytest.approx(2.1) and sp_.lower_bound == pytest.approx(2.1**2 / 4)
    ap = make_surrogate(-2.0, 0.1, 2.0, "AP")
    assert ap.shift == 2.0 and ap.lower_bound == 1.0
    ex = make_surrogate(-2.0, 0.1, 2.0, "exact")
    assert ex.variant == "EXACT" and ex.shift == 2.0


def test_nonnegative_theta_gives_convex_branch():
    spec = make_surrogate(0.5, 1e-3, 1.0, "SP")
    assert spec.variant == "RP" and spec.shift == 0.0 and spec.lower_bound == 0.0
    assert convex_spec().variant == "RP"


def test_unknown_variant():
    with pytest.raises(ValueError):
        make_surrogate(-1.0, 0.1, 1.0, "XY")


def test_lifted_equals_f1_on_boundary():
    prob = _prob()
    spec = make_surrogate(-3.0, 0.2, prob.rho, "SP")
    x = np.array([0.3, -0.2, 0.5, 0.1])
    val, _ = lifted_value_grad(prob, spec, LiftedPoint(x, x @ x))
    assert val == pytest.approx(f1_value(prob, x), rel=1e-14, abs=1e-14)


def test_lifted_rejects_negative_y():
    prob = _prob()
    with pytest.raises(ValueError):
        lifted_value_grad(prob, convex_spec(), LiftedPoint(np.zeros(4), -1.0))


def test_lifted_is_convex_along_segments():
    prob = _prob(5, 3)
    lam1 = np.linalg.eigvalsh(prob.A.to_dense())[0]
    spec = make_surrogate(lam1, 0.0, prob.rho, "EXACT")
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = LiftedPoint(rng.standard_normal(5), rng.uniform(0.1, 5))
        q = LiftedPoint(rng.standard_normal(5), rng.uniform(0.1, 5))
        m = LiftedPoint(0.5 * (p.x + q.x), 0.5 * (p.y + q.y))
        fp = lifted_value_grad(prob, spec, p)[0]
        fq = lifted_value_grad(prob, spec, q)[0]
        assert lifted_value_grad(prob, spec, m)[0] <= 0.5 * (fp + fq) + 1e-10


def test_gamma():
    prob = CrsProblem(np.diag([-1.0, 3.0]), np.ones(2), 1.0)
    spec = make_surrogate(-1.0, 0.0, 1.0, "AP")
    assert lipschitz_gamma(prob, spec) == pytest.approx(max(4.0, 0.25))
    with pytest.raises(ValueError):
        lipschitz_gamma(prob, convex_spec())


def test_problem_file_roundtrip(tmp_path):
    prob = _prob(3, 2)
    manifest = save_problem(tmp_path, prob, "p")
    back = load_problem(manifest)
    np.testing.assert_allclose(back.A.to_dense(), prob.A.to_dense())
    np.testing.assert_array_equal(back.b, prob.b)
    assert back.rho == prob.rho


def test_manifest_missing_key(tmp_path):
    (tmp_path / "m.crs").write_text("matrix=a.mtx\nrho=1\n")
    with pytest.raises(ValueError, match="rhs"):
        load_problem(tmp_path / "m.crs")
