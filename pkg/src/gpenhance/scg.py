"""
Scaled conjugate gradient minimisation (Moller, 1993).

Curvature along the search direction comes from a finite difference of
gradients, so no Hessian or line search is needed; a Levenberg-Marquardt
style scale ``beta`` keeps the local quadratic model positive definite and
is adapted from the ratio of actual to predicted reduction.  A step is only
accepted when it does not increase f.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SCGResult", "scg_minimize"]

log = logging.getLogger(__name__)

SIGMA0 = 1e-4
BETA_MIN = 1e-15
BETA_MAX = 1e100


@dataclass
class SCGResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iter: int
    n_fev: int
    converged: bool
    message: str
    # f after every accepted step, starting with f(x0)
    history: list = field(default_factory=list)


def _safe(f, x):
    try:
        v = float(f(x))
    except (np.linalg.LinAlgError, FloatingPointError, ValueError):
        return np.inf
    return v if np.isfinite(v) else np.inf


def scg_minimize(f, grad, x0, max_iter=100, grad_tol=1e-6, x_tol=0.0, f_tol=0.0,
                 callback=None):
    """Minimise ``f`` starting from ``x0``.

    Stops when the max-norm of the gradient drops to ``grad_tol``, when an
    accepted step is below ``x_tol`` and its decrease below ``f_tol``, or
    after ``max_iter`` iterations.  Trial points where ``f`` is non-finite
    or raises a LinAlgError count as failed steps.  ``callback(x, fx)`` is
    called after each accepted step.
    """
    x = np.array(x0, dtype=np.float64)
    n = x.size
    fold = float(f(x))
    g = np.asarray(grad(x), dtype=np.float64)
    if not np.isfinite(fold) or not np.all(np.isfinite(g)):
        raise ValueError("objective or gradient is not finite at the starting point")
    n_fev = 1
    history = [fold]

    d = -g
    success = True
    n_success = 0
    beta = 1.0
    mu = kappa = theta = 0.0
    fnow = fold

    def result(it, converged, msg):
        return SCGResult(x, fnow, g, it, n_fev, converged, msg, history)

    if np.max(np.abs(g)) <= grad_tol:
        return result(0, True, "gradient below tolerance")

    for it in range(1, max_iter + 1):
        if success:
            mu = d @ g
            if mu >= 0:
                d = -g
                mu = d @ g
            kappa = d @ d
            if kappa < np.finfo(float).eps:
                return result(it - 1, True, "search direction vanished")
            sigma = SIGMA0 / np.sqrt(kappa)
            try:
                gplus = np.asarray(grad(x + sigma * d), dtype=np.float64)
            except np.linalg.LinAlgError:
                gplus = np.full_like(g, np.nan)
            theta = d @ (gplus - g) / sigma
            if not np.isfinite(theta):
                theta = 0.0

        # scale the curvature so the quadratic model is convex
        delta = theta + beta * kappa
        if delta <= 0:
            delta = beta * kappa
            beta = beta - theta / kappa
        step = -mu / delta
        xnew = x + step * d
        fnew = _safe(f, xnew)
        n_fev += 1

        # ratio of actual to predicted reduction
        big_delta = 2.0 * (fnew - fold) / (step * mu) if np.isfinite(fnew) else -np.inf
        if big_delta >= 0 and fnew <= fold:
            success = True
            n_success += 1
            x = xnew
            fnow = fnew
        else:
            success = False
            fnow = fold

        if success:
            history.append(fnow)
            if callback is not None:
                callback(x, fnow)
            small_step = np.max(np.abs(step * d)) < x_tol
            small_drop = abs(fnew - fold) < f_tol
            gold = g
            fold = fnew
            g = np.asarray(grad(x), dtype=np.float64)
            if np.max(np.abs(g)) <= grad_tol:
                return result(it, True, "gradient below tolerance")
            if small_step and small_drop:
                return result(it, True, "step and decrease below tolerance")

        if big_delta < 0.25:
            beta = min(4.0 * beta, BETA_MAX)
        if big_delta > 0.75:
            beta = max(0.5 * beta, BETA_MIN)

        if n_success == n:
            d = -g
            n_success = 0
        elif success:
            gamma = (gold - g) @ g / mu
            d = gamma * d - g

    return result(max_iter, False, "maximum iterations reached")
