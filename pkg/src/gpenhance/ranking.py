"""
Pairwise ranking on difference vectors.

Every ordering constraint "better beats worse" becomes one difference
vector ``worse - better``; the kernel rank-SVM dual over those vectors is

    max_a  1'a - 0.5 a' K_y a,   0 <= a_i <= C,

with ``K_y`` the noisy gram of the differences.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .kernel import gram

__all__ = ["DifferenceSet", "RankModel", "build_differences", "dual_objective",
           "kkt_violation", "solve_dual", "quality_score", "rank_candidates"]

log = logging.getLogger(__name__)

LOW_HIGH, POOR_LOW, POOR_HIGH = "low-high", "poor-low", "poor-high"


@dataclass(frozen=True)
class DifferenceSet:
    vectors: np.ndarray
    # (kind, image index, high index or -1, poor index or -1)
    provenance: list = field(default_factory=list)

    def __len__(self):
        return self.vectors.shape[0]


def build_differences(F, F_high, F_poor):
    """Difference vectors for N low images with p counterparts per class.

    ``F`` is (N, D); ``F_high`` and ``F_poor`` are (N, p, D).  Per image the
    order is p low-high, p poor-low, then p*p poor-high with the high index
    varying slowest.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    F_high = np.asarray(F_high, dtype=np.float64)
    F_poor = np.asarray(F_poor, dtype=np.float64)
    n = F.shape[0]
    if F_high.ndim != 3 or F_poor.ndim != 3 or F_high.shape[0] != n \
            or F_poor.shape[0] != n or F_high.shape[1] != F_poor.shape[1]:
        raise ValueError(f"ragged counterpart counts: low {F.shape}, "
                         f"high {F_high.shape}, poor {F_poor.shape}")
    p = F_high.shape[1]
    blocks = []
    prov = []
    for i in range(n):
        blocks.append(F[i] - F_high[i])
        prov += [(LOW_HIGH, i, j, -1) for j in range(p)]
        blocks.append(F_poor[i] - F[i])
        prov += [(POOR_LOW, i, -1, k) for k in range(p)]
        blocks.append((F_poor[i][None, :, :] - F_high[i][:, None, :]).reshape(p * p, -1))
        prov += [(POOR_HIGH, i, j, k) for j in range(p) for k in range(p)]
    return DifferenceSet(np.concatenate(blocks, axis=0), prov)


@dataclass(frozen=True)
class RankModel:
    alpha: np.ndarray
    C: float
    differences: DifferenceSet
    sweeps: int = 0
    kkt: float = 0.0
    history: tuple = ()


def dual_objective(alpha, K):
    return float(alpha.sum() - 0.5 * alpha @ K @ alpha)


def kkt_violation(alpha, K, C):
    """Largest KKT violation of the box QP (gradient ``1 - K alpha``)."""
    g = 1.0 - K @ alpha
    at_zero = alpha <= 0.0
    at_c = alpha >= C
    viol = np.where(at_zero, np.maximum(g, 0.0),
                    np.where(at_c, np.maximum(-g, 0.0), np.abs(g)))
    return float(viol.max()) if viol.size else 0.0


def solve_box_qp(K, C, tol=1e-5, max_sweeps=500, alpha0=None):
    """Cyclic coordinate ascent with exact clipped coordinate maximisation.

    Returns ``(alpha, sweeps, kkt, history)`` where ``history`` holds the
    dual objective after each sweep.
    """
    n = K.shape[0]
    alpha = np.zeros(n) if alpha0 is None else np.clip(np.array(alpha0, dtype=float), 0.0, C)
    if C <= 0:
        return np.zeros(n), 0, 0.0, (0.0,)
    grad = 1.0 - K @ alpha
    diag = np.diag(K).copy()
    history = [dual_objective(alpha, K)]
    kkt = kkt_violation(alpha, K, C)
    sweeps = 0
    while kkt >= tol and sweeps < max_sweeps:
        for i in range(n):
            # exact maximiser along coordinate i, then clip to the box
            new = min(max(alpha[i] + grad[i] / diag[i], 0.0), C)
            step = new - alpha[i]
            if step != 0.0:
                alpha[i] = new
                grad -= step * K[i]  # K is symmetric; rows are contiguous
        sweeps += 1
        # refresh to stop drift in the running gradient
        grad = 1.0 - K @ alpha
        history.append(dual_objective(alpha, K))
        kkt = kkt_violation(alpha, K, C)
    if kkt >= tol:
        log.warning("dual solver stopped after %d sweeps with KKT violation %.3g", sweeps, kkt)
    return alpha, sweeps, kkt, tuple(history)


def solve_dual(dset, h, C=1.0, tol=1e-5, max_sweeps=500, alpha0=None):
    K = gram(dset.vectors, None, h, add_noise=True)
    alpha, sweeps, kkt, history = solve_box_qp(K, C, tol, max_sweeps, alpha0)
    return RankModel(alpha, float(C), dset, sweeps, kkt, history)


def quality_score(model, h, f_low, f_cand):
    """Score of one or more candidates relative to the original image.

    ``f_cand`` may be a single vector or a (k, D) array; higher is better.
    """
    f_cand = np.asarray(f_cand, dtype=np.float64)
    single = f_cand.ndim == 1
    diffs = np.asarray(f_low, dtype=np.float64)[None, :] - np.atleast_2d(f_cand)
    active = model.alpha > 0
    if not np.any(active):
        q = np.zeros(diffs.shape[0])
    else:
        q = gram(diffs, model.differences.vectors[active], h) @ model.alpha[active]
    return float(q[0]) if single else q


def rank_candidates(model, h, f_low, candidates):
    """Candidate indices by descending score; ties keep input order."""
    if len(candidates) == 0:
        raise ValueError("no candidates to rank")
    q = quality_score(model, h, f_low, np.atleast_2d(np.asarray(candidates, dtype=np.float64)))
    return [int(i) for i in np.argsort(-q, kind="stable")]
