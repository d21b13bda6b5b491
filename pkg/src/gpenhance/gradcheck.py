"""Central finite-difference check of the joint objective's gradient."""
from dataclasses import dataclass

import numpy as np

from .joint import JointObjective
from .kernel import Hyperparams
from .ranking import build_differences

__all__ = ["GradCheckResult", "random_instance", "check_gradient", "run_gradcheck"]


@dataclass
class GradCheckResult:
    seed: int
    analytic: np.ndarray
    numeric: np.ndarray
    rel_error: np.ndarray

    @property
    def max_rel_error(self):
        return float(self.rel_error.max())


def random_instance(seed, n=6, dim=5, p=2, C=1.0):
    """A small objective with random features, targets, alpha and h.

    Returns ``(objective, x)`` where ``x`` is the log-hyperparameter vector.
    """
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(n, dim))
    F_high = F[:, None, :] + 0.5 * rng.normal(size=(n, p, dim))
    F_poor = F[:, None, :] + 1.5 * rng.normal(size=(n, p, dim))
    targets = rng.normal(size=(3, n))
    targets -= targets.mean(axis=1, keepdims=True)
    dset = build_differences(F, F_high, F_poor)
    # a mix of zero, interior and bound coefficients
    alpha = rng.uniform(0, C, size=len(dset))
    alpha[rng.uniform(size=len(dset)) < 0.3] = 0.0
    alpha[rng.uniform(size=len(dset)) < 0.2] = C
    obj = JointObjective(F, F_high, F_poor, targets, dset, alpha)
    h = Hyperparams.from_natural(rng.uniform(0.5, 2.0), rng.uniform(0.05, 0.5, size=dim),
                                 rng.uniform(0.05, 0.3))
    return obj, h.to_vector()


def check_gradient(obj, x, step=1e-5, floor=1e-6):
    """Relative error of the analytic gradient against central differences,
    with denominator max(|fd|, floor) per coordinate."""
    x = np.asarray(x, dtype=np.float64)
    analytic = obj.grad(x)
    numeric = np.empty_like(x)
    for q in range(x.size):
        e = np.zeros_like(x)
        e[q] = step
        numeric[q] = (obj.value(x + e) - obj.value(x - e)) / (2 * step)
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), floor)
    return analytic, numeric, rel


def run_gradcheck(seeds=range(5), n=6, dim=5, p=2, step=1e-5):
    out = []
    for seed in seeds:
        obj, x = random_instance(seed, n, dim, p)
        a, num, rel = check_gradient(obj, x, step)
        out.append(GradCheckResult(int(seed), a, num, rel))
    return out
