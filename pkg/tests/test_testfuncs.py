import numpy as np
import pytest

from crs.testfuncs import get_objective


def _fd_grad(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@pytest.mark.parametrize("name", ["rosenbrock", "humps"])
def test_gradient_and_hessian_match_differences(name):
    obj, _ = get_objective(name, 7)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.uniform(-2, 2, 7)
        g = obj.eval_g(x)
        np.testing.assert_allclose(g, _fd_grad(obj.eval_f, x), rtol=1e-6, atol=1e-6)
        H = obj.eval_hess(x).to_dense()
        assert np.array_equal(H, H.T)
        fd = np.column_stack([_fd_grad(lambda z: obj.eval_g(z)[j], x) for j in range(7)])
        np.testing.assert_allclose(H, fd, rtol=1e-5, atol=1e-5)


def test_known_minima():
    obj, x0 = get_objective("rosenbrock", 6)
    assert obj.eval_f(np.ones(6)) == 0.0
    assert x0[0] == -1.2 and x0[1] == 1.0
    obj, _ = get_objective("humps", 4)
    assert obj.eval_f(np.zeros(4)) == 0.0


def test_unknown_name():
    with pytest.raises(ValueError):
        get_objective("beale", 2)
