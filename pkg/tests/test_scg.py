import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import rosen, rosen_der

from gpenhance.scg import scg_minimize


def _quadratic(seed, n=6):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    A = M @ M.T + n * np.eye(n)
    b = rng.normal(size=n)
    return A, b, (lambda x: 0.5 * x @ A @ x - b @ x), (lambda x: A @ x - b)


class TestSCG:
    def test_quadratic_minimum(self):
        A, b, f, g = _quadratic(0)
        res = scg_minimize(f, g, np.zeros(6), max_iter=200, grad_tol=1e-10)
        np.testing.assert_allclose(res.x, np.linalg.solve(A, b), atol=1e-8)
        assert res.converged

    def test_rosenbrock(self):
        res = scg_minimize(rosen, rosen_der, np.array([-1.2, 1.0]), max_iter=500, grad_tol=1e-8)
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-5)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_history_non_increasing(self, seed):
        x0 = np.random.default_rng(seed).uniform(-2, 2, size=4)
        res = scg_minimize(rosen, rosen_der, x0, max_iter=60)
        assert np.all(np.diff(res.history) <= 0)
        assert res.fun == res.history[-1] <= rosen(x0)

    def test_iteration_cap(self):
        res = scg_minimize(rosen, rosen_der, np.array([-1.2, 1.0]), max_iter=3)
        assert res.n_iter <= 3 and not res.converged

    def test_nonfinite_start(self):
        with pytest.raises(ValueError):
            scg_minimize(lambda x: np.inf, lambda x: x, np.zeros(2))

    def test_failed_trial_points_are_rejected(self):
        # the objective refuses x[0] < -0.5; minimum of the smooth part lies beyond
        def f(x):
            if x[0] < -0.5:
                raise np.linalg.LinAlgError("outside")
            return (x[0] + 1) ** 2 + x[1] ** 2

        def g(x):
            return np.array([2 * (x[0] + 1), 2 * x[1]])
        res = scg_minimize(f, g, np.array([1.0, 1.0]), max_iter=100)
        assert res.x[0] >= -0.5
        assert np.all(np.diff(res.history) <= 0)

    def test_callback(self):
        seen = []
        A, b, f, g = _quadratic(1)
        scg_minimize(f, g, np.zeros(6), max_iter=5, callback=lambda x, fx: seen.append(fx))
        assert seen and np.all(np.diff(seen) <= 0)
