import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gpenhance.kernel import Hyperparams, grad_contraction, gram, gram_grads, kernel_eval


def _h(dim, sf2=1.3, theta=None, sy2=0.2):
    theta = np.full(dim, 0.7) if theta is None else theta
    return Hyperparams.from_natural(sf2, theta, sy2)


def _fd_gram(A, h, q, step=1e-5):
    x = h.to_vector()
    e = np.zeros_like(x)
    e[q] = step
    up = gram(A, None, Hyperparams.from_vector(x + e), add_noise=True)
    dn = gram(A, None, Hyperparams.from_vector(x - e), add_noise=True)
    return (up - dn) / (2 * step)


class TestHyperparams:
    def test_vector_round_trip(self):
        h = _h(4)
        g = Hyperparams.from_vector(h.to_vector())
        np.testing.assert_array_equal(g.to_vector(), h.to_vector())
        assert h.dim == 4

    @pytest.mark.parametrize("bad", [(np.nan, [0.0], 0.0), (0.0, [np.inf], 0.0), (0.0, [], 0.0)])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            Hyperparams(bad[0], np.array(bad[1], dtype=float), bad[2])


class TestKernelEval:
    def test_identical_inputs(self):
        h = _h(3)
        assert kernel_eval(np.ones(3), np.ones(3), h) == pytest.approx(h.sigma_f2, rel=1e-15)

    def test_zero_theta_limit(self):
        h = _h(2, theta=np.full(2, 1e-300))
        assert kernel_eval(np.zeros(2), np.array([5.0, -3.0]), h) == pytest.approx(h.sigma_f2)

    def test_direct_substitution(self):
        h = _h(2, sf2=1.0, theta=np.ones(2))
        assert kernel_eval(np.zeros(2), np.array([1.0, 2.0]), h) == pytest.approx(np.exp(-2.5), rel=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            kernel_eval(np.zeros(2), np.zeros(3), _h(2))

    @given(arrays(np.float64, 3, elements=st.floats(-5, 5)),
           arrays(np.float64, 3, elements=st.floats(-5, 5)))
    def test_symmetric_and_bounded(self, a, b):
        h = _h(3)
        k = kernel_eval(a, b, h)
        assert k == kernel_eval(b, a, h)
        assert 0 <= k <= h.sigma_f2

    @given(st.floats(0.01, 3.0), st.floats(1.0, 5.0), st.integers(0, 2))
    def test_monotone_in_theta(self, t, factor, d):
        a, b = np.array([0.0, 0.5, -1.0]), np.array([1.0, -0.5, 0.3])
        theta = np.full(3, t)
        bigger = theta.copy()
        bigger[d] *= factor
        assert kernel_eval(a, b, _h(3, theta=bigger)) <= kernel_eval(a, b, _h(3, theta=theta))


class TestGram:
    def test_single_point_noise(self):
        h = _h(2)
        np.testing.assert_allclose(gram(np.zeros((1, 2)), None, h, add_noise=True),
                                   [[h.sigma_f2 + h.sigma_y2]])

    def test_entries_match_kernel_eval(self, rng):
        A, B = rng.normal(size=(4, 3)), rng.normal(size=(5, 3))
        h = _h(3)
        K = gram(A, B, h)
        ref = np.array([[kernel_eval(a, b, h) for b in B] for a in A])
        np.testing.assert_allclose(K, ref, rtol=1e-12)

    def test_symmetric_and_factorizable(self, rng):
        K = gram(rng.normal(size=(5, 4)), None, _h(4), add_noise=True)
        assert np.abs(K - K.T).max() == 0
        np.linalg.cholesky(K)

    def test_cross_gram_has_no_noise(self):
        A = np.ones((2, 3))
        h = _h(3)
        np.testing.assert_allclose(gram(A, A.copy(), h), h.sigma_f2)
        with pytest.raises(ValueError):
            gram(A, A.copy(), h, add_noise=True)

    @given(arrays(np.float64, (6, 3), elements=st.floats(-3, 3)))
    @settings(max_examples=50)
    def test_noisy_gram_positive_definite(self, A):
        np.linalg.cholesky(gram(A, None, _h(3, sy2=1e-3), add_noise=True))


class TestGramGrads:
    def test_noise_derivative_is_diagonal(self, rng):
        h = _h(3)
        _, _, dsy = gram_grads(rng.normal(size=(4, 3)), h)
        np.testing.assert_allclose(dsy, h.sigma_y2 * np.eye(4))

    def test_finite_differences(self):
        rng = np.random.default_rng(4)
        A = rng.normal(size=(4, 3))
        h = _h(3, theta=rng.uniform(0.2, 1.0, 3))
        dsf, dth, dsy = gram_grads(A, h)
        analytic = [dsf, *dth, dsy]
        for q, dK in enumerate(analytic):
            fd = _fd_gram(A, h, q)
            rel = np.abs(dK - fd) / np.maximum(np.abs(fd), 1e-8)
            assert rel.max() < 1e-6, q

    def test_coincident_points(self):
        A = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
        _, dth, _ = gram_grads(A, _h(2))
        assert np.all(dth[:, 0, 1] == 0) and np.all(dth[:, 1, 0] == 0)

    @pytest.mark.parametrize("noise", [True, False])
    def test_contraction_matches_dense_trace(self, rng, noise):
        A = rng.normal(size=(5, 3))
        G = rng.normal(size=(5, 5))
        h = _h(3, theta=rng.uniform(0.2, 1.0, 3))
        dsf, dth, dsy = gram_grads(A, h, noise=noise)
        dense = [np.sum(G * dsf), *(np.sum(G * d) for d in dth), np.sum(G * dsy)]
        fast = grad_contraction(G, A, None, gram(A, None, h), h, noise=noise)
        np.testing.assert_allclose(fast, dense, rtol=1e-10, atol=1e-12)

    def test_contraction_cross_set(self, rng):
        A, B = rng.normal(size=(3, 2)), rng.normal(size=(4, 2))
        G = rng.normal(size=(3, 4))
        h = _h(2, theta=np.array([0.4, 0.9]))
        fast = grad_contraction(G, A, B, gram(A, B, h), h)
        x = h.to_vector()
        for q in range(x.size):
            e = np.zeros_like(x)
            e[q] = 1e-6
            fd = (np.sum(G * gram(A, B, Hyperparams.from_vector(x + e)))
                  - np.sum(G * gram(A, B, Hyperparams.from_vector(x - e)))) / 2e-6
            assert fast[q] == pytest.approx(fd, rel=1e-6, abs=1e-9)
