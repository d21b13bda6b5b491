"""Exact GP regression through a Cholesky factor of the noisy gram."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .kernel import gram

__all__ = ["NotPositiveDefiniteError", "GPHead", "robust_cholesky", "nll",
           "fit_head", "predict", "predict_batch"]

log = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_STOP = 1e-6


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


def robust_cholesky(K):
    """Lower Cholesky factor of K, escalating diagonal jitter on failure.

    Jitter runs 1e-10 .. 1e-6 times the mean diagonal.  Returns
    ``(L, jitter)`` where ``jitter`` is the absolute amount added.
    """
    if not np.all(np.isfinite(K)):
        raise NotPositiveDefiniteError("kernel matrix not positive definite")
    try:
        return np.linalg.cholesky(K), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(K)))
    rel = JITTER_START
    while rel <= JITTER_STOP * (1 + 1e-9):
        jitter = rel * scale
        try:
            L = np.linalg.cholesky(K + jitter * np.eye(K.shape[0]))
            log.debug("cholesky needed jitter %.3g", jitter)
            return L, jitter
        except np.linalg.LinAlgError:
            rel *= 10.0
    raise NotPositiveDefiniteError("kernel matrix not positive definite")


def _logdet(L):
    return 2.0 * np.sum(np.log(np.diag(L)))


def nll(F, y, h):
    """Negative log marginal likelihood of centred targets ``y``."""
    y = np.asarray(y, dtype=np.float64)
    L, _ = robust_cholesky(gram(F, None, h, add_noise=True))
    a = cho_solve((L, True), y)
    return 0.5 * y @ a + 0.5 * _logdet(L) + 0.5 * y.size * np.log(2 * np.pi)


@dataclass(frozen=True)
class GPHead:
    """One fitted regression head; ``targets`` are stored centred."""
    target_index: int
    targets: np.ndarray
    target_mean: float
    cholesky_factor: np.ndarray
    weights: np.ndarray
    jitter: float = 0.0


def fit_head(F, y_raw, h, target_index=0):
    y_raw = np.asarray(y_raw, dtype=np.float64).ravel()
    F = np.atleast_2d(F)
    if F.shape[0] != y_raw.size or y_raw.size == 0:
        raise ValueError(f"need matching, nonempty inputs: {F.shape[0]} features, "
                         f"{y_raw.size} targets")
    mean = float(y_raw.mean())
    y = y_raw - mean
    L, jitter = robust_cholesky(gram(F, None, h, add_noise=True))
    return GPHead(target_index, y, mean, L, cho_solve((L, True), y), jitter)


def predict_batch(head, F_train, F_star, h):
    """Posterior means and variances for every row of ``F_star``.

    The prior variance at a test point includes the noise term, so far from
    the data the variance reverts to sf2 + sy2.
    """
    F_star = np.atleast_2d(F_star)
    Ks = gram(F_star, F_train, h)
    mean = Ks @ head.weights + head.target_mean
    V = solve_triangular(head.cholesky_factor, Ks.T, lower=True, check_finite=False)
    var = h.sigma_f2 + h.sigma_y2 - np.einsum("ij,ij->j", V, V)
    if np.any(var < -1e-10):
        log.warning("posterior variance below zero by %.3g", -var.min())
    return mean, np.maximum(var, 0.0)


def predict(head, F_train, f_star, h):
    mean, var = predict_batch(head, F_train, np.asarray(f_star)[None, :], h)
    return float(mean[0]), float(var[0])
