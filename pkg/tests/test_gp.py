import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpenhance.gp import NotPositiveDefiniteError, fit_head, nll, predict, predict_batch, robust_cholesky
from gpenhance.kernel import Hyperparams, gram


def _instance(seed, n=6, dim=3, sy2=0.05):
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(n, dim))
    y = rng.normal(size=n)
    h = Hyperparams.from_natural(rng.uniform(0.5, 2), rng.uniform(0.1, 1, dim), sy2)
    return F, y, h


def _dense_posterior(F, y, h, f):
    Ky = gram(F, None, h, add_noise=True)
    inv = np.linalg.inv(Ky)
    ks = gram(f[None, :], F, h)[0]
    mean = y.mean() + ks @ inv @ (y - y.mean())
    return mean, h.sigma_f2 + h.sigma_y2 - ks @ inv @ ks


class TestNLL:
    def test_scalar(self):
        h = Hyperparams.from_natural(1.5, np.ones(2), 0.3)
        assert nll(np.zeros((1, 2)), np.zeros(1), h) == pytest.approx(
            0.5 * np.log(1.8) + 0.5 * np.log(2 * np.pi), rel=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_dense_oracle(self, seed):
        F, y, h = _instance(seed, n=3)
        Ky = gram(F, None, h, add_noise=True)
        ref = 0.5 * y @ np.linalg.inv(Ky) @ y + 0.5 * np.log(np.linalg.det(Ky)) + 1.5 * np.log(2 * np.pi)
        assert nll(F, y, h) == pytest.approx(ref, abs=1e-10)

    def test_target_scaling(self):
        F, y, h = _instance(1)
        base = nll(F, np.zeros_like(y), h)
        assert nll(F, 2 * y, h) - base == pytest.approx(4 * (nll(F, y, h) - base), rel=1e-12)


class TestCholesky:
    def test_jitter_escalation(self):
        K = np.ones((3, 3))  # rank one
        L, jitter = robust_cholesky(K)
        assert 0 < jitter <= 1e-6
        np.testing.assert_allclose(L @ L.T, K + jitter * np.eye(3), atol=1e-12)

    def test_hard_failure(self):
        with pytest.raises(NotPositiveDefiniteError, match="kernel matrix not positive definite"):
            robust_cholesky(-np.eye(2))


class TestFitPredict:
    def test_weights_solve_system(self):
        F, y, h = _instance(2)
        head = fit_head(F, y, h)
        Ky = gram(F, None, h, add_noise=True)
        np.testing.assert_allclose(Ky @ head.weights, y - y.mean(), atol=1e-8)
        L = head.cholesky_factor
        assert np.abs(L @ L.T - Ky).max() <= 1e-8 * np.abs(Ky).max()

    def test_duplicate_rows(self):
        F, y, _ = _instance(3)
        F[1] = F[0]
        h = Hyperparams.from_natural(1.0, np.ones(3), 1e-4)
        fit_head(F, y, h)

    def test_single_point(self):
        head = fit_head(np.zeros((1, 2)), [0.7], Hyperparams.from_natural(1, np.ones(2), 0.1))
        np.testing.assert_array_equal(head.weights, [0.0])
        assert head.target_mean == 0.7

    @pytest.mark.parametrize("seed", range(5))
    def test_dense_oracle(self, seed):
        F, y, h = _instance(seed)
        head = fit_head(F, y, h)
        f = np.random.default_rng(seed + 100).normal(size=3)
        mean, var = predict(head, F, f, h)
        ref_mean, ref_var = _dense_posterior(F, y, h, f)
        assert mean == pytest.approx(ref_mean, abs=1e-8)
        assert var == pytest.approx(ref_var, abs=1e-8)

    def test_noiseless_interpolation(self):
        F, y, _ = _instance(4)
        h = Hyperparams.from_natural(1.0, np.full(3, 0.5), 1e-12)
        head = fit_head(F, y, h)
        for i in range(len(y)):
            mean, var = predict(head, F, F[i], h)
            assert mean == pytest.approx(y[i], abs=1e-4)
            assert var <= 1e-6

    def test_prior_reversion(self):
        F, y, h = _instance(5)
        head = fit_head(F, y, h)
        mean, var = predict(head, F, np.full(3, 1e3), h)
        assert mean == pytest.approx(y.mean(), abs=1e-12)
        assert var == pytest.approx(h.sigma_f2 + h.sigma_y2, rel=1e-12)

    def test_batch_matches_single(self):
        F, y, h = _instance(6)
        head = fit_head(F, y, h)
        Q = np.random.default_rng(0).normal(size=(4, 3))
        means, var = predict_batch(head, F, Q, h)
        for i in range(4):
            assert (means[i], var[i]) == pytest.approx(predict(head, F, Q[i], h), abs=1e-14)

    def test_duplicate_point_redundancy(self):
        F, y, _ = _instance(7)
        h = Hyperparams.from_natural(1.0, np.full(3, 0.5), 1e-9)
        F2, y2 = np.vstack([F, F[:1]]), np.append(y, y[0])
        a, b = fit_head(F, y, h), fit_head(F2, y2, h)
        # the centring mean shifts with the duplicate; at the training inputs
        # the interpolant absorbs that shift
        np.testing.assert_allclose(predict_batch(a, F, F, h)[0], predict_batch(b, F2, F, h)[0],
                                   atol=1e-6)

    @given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=30, deadline=None)
    def test_linear_in_targets(self, seed, a, b):
        F, y1, h = _instance(seed)
        y2 = np.random.default_rng(seed + 1).normal(size=y1.size)
        f = np.random.default_rng(seed + 2).normal(size=3)

        def mean(y):
            return predict(fit_head(F, y, h), F, f, h)[0]
        assert mean(a * y1 + b * y2) == pytest.approx(a * mean(y1) + b * mean(y2), abs=1e-9)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_variance_bounds(self, seed):
        F, y, h = _instance(seed)
        _, var = predict_batch(fit_head(F, y, h), F, np.random.default_rng(seed).normal(size=(8, 3)), h)
        assert np.all(var >= 0) and np.all(var <= h.sigma_f2 + h.sigma_y2 + 1e-10)
