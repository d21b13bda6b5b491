"""
Joint regression + ranking objective over shared kernel hyperparameters.

For fixed ranking coefficients ``alpha`` the objective is

    Z(h) = sum_m [0.5 y_m' K_y^-1 y_m + 0.5 log|K_y|]       (three GP heads)
           - 1'alpha + 0.5 alpha' K_y^D alpha                (ranking dual)
           + w_c * sum_i (||K(H_i, H_i)||_F^2 - ||K(H_i, P_i)||_F^2)

where K_y is the noisy gram of the low-image features, K_y^D the noisy gram
of the difference vectors, and H_i / P_i the high / poor counterparts of
image i (noise-free grams).  Training alternates an exact dual solve for
alpha with SCG over the log hyperparameters.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve

from .features import StandardizationStats, apply_standardization, fit_standardization
from .gp import fit_head, robust_cholesky
from .kernel import Hyperparams, gram, grad_contraction
from .ranking import RankModel, build_differences, solve_dual
from .scg import scg_minimize

__all__ = ["JointConfig", "JointObjective", "TrainedModel", "cluster_term",
           "initial_hyperparams", "train_joint", "MODEL_VERSION"]

log = logging.getLogger(__name__)

MODEL_VERSION = 1


def _block_sq_dist(A, B, theta):
    # per-image theta-weighted distances: A (N, p, D), B (N, q, D) -> (N, p, q)
    As = A * np.sqrt(theta)
    Bs = B * np.sqrt(theta)
    a2 = np.einsum("ijd,ijd->ij", As, As)
    b2 = np.einsum("ijd,ijd->ij", Bs, Bs)
    r2 = a2[:, :, None] + b2[:, None, :] - 2.0 * np.einsum("ijd,ikd->ijk", As, Bs)
    return np.maximum(r2, 0.0)


def _block_grams(F_high, F_poor, h):
    Kpp = h.sigma_f2 * np.exp(-0.5 * _block_sq_dist(F_high, F_high, h.theta))
    Kpm = h.sigma_f2 * np.exp(-0.5 * _block_sq_dist(F_high, F_poor, h.theta))
    return Kpp, Kpm


def cluster_term(F_high, F_poor, h):
    """Sum over images of ||K(H_i, H_i)||_F^2 - ||K(H_i, P_i)||_F^2."""
    F_high = np.asarray(F_high, dtype=np.float64)
    F_poor = np.asarray(F_poor, dtype=np.float64)
    if F_high.ndim != 3 or F_high.shape != F_poor.shape:
        raise ValueError(f"ragged counterpart counts: high {F_high.shape}, poor {F_poor.shape}")
    Kpp, Kpm = _block_grams(F_high, F_poor, h)
    return float(np.sum(Kpp ** 2) - np.sum(Kpm ** 2))


def _block_grad(W, A, B, h):
    # gradient of sum_i sum_jk G_ijk K_ijk where W = G * K, blocks as above
    rows = W.sum(axis=2)
    cols = W.sum(axis=1)
    t = (np.einsum("ij,ijq->q", rows, A * A) + np.einsum("ik,ikq->q", cols, B * B)
         - 2.0 * np.einsum("ijq,ijq->q", A, np.einsum("ijk,ikq->ijq", W, B)))
    grad = np.zeros(h.dim + 2)
    grad[0] = W.sum()
    grad[1:-1] = -0.5 * h.theta * t
    return grad


class JointObjective:
    """Z and dZ/dlog(h) for standardized training data at fixed ``alpha``.

    ``targets`` is (3, N) and already centred per head.  Evaluations are
    cached on the last hyperparameter vector so that SCG's paired f / g
    calls at an accepted point cost one evaluation.
    """

    def __init__(self, F, F_high, F_poor, targets, differences, alpha=None,
                 cluster_weight=1.0):
        self.F = np.atleast_2d(np.asarray(F, dtype=np.float64))
        self.F_high = np.asarray(F_high, dtype=np.float64)
        self.F_poor = np.asarray(F_poor, dtype=np.float64)
        self.targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
        self.differences = differences
        self.cluster_weight = float(cluster_weight)
        self.alpha = np.zeros(len(differences)) if alpha is None else np.asarray(alpha, dtype=float)
        self._key = None
        self._cache = None

    @property
    def alpha(self):
        return self._alpha

    @alpha.setter
    def alpha(self, value):
        self._alpha = np.array(value, dtype=np.float64)
        self._key = None

    def terms(self, h):
        """The individual addends of Z at ``h`` (no gradient)."""
        if not isinstance(h, Hyperparams):
            h = Hyperparams.from_vector(h)
        Ky = gram(self.F, None, h, add_noise=True)
        L, _ = robust_cholesky(Ky)
        A = cho_solve((L, True), self.targets.T)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        quad = 0.5 * np.einsum("nm,mn->", self.targets, A)
        n_heads = self.targets.shape[0]
        act = self.alpha > 0
        a = self.alpha[act]
        KD = gram(self.differences.vectors[act], None, h, add_noise=True)
        return {
            "regression": float(quad + 0.5 * n_heads * logdet),
            "ranking": float(-self.alpha.sum() + 0.5 * a @ KD @ a),
            "cluster": self.cluster_weight * cluster_term(self.F_high, self.F_poor, h),
        }

    def value(self, x):
        return self.value_and_grad(x)[0]

    def grad(self, x):
        return self.value_and_grad(x)[1].copy()

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=np.float64)
        key = x.tobytes()
        if key == self._key:
            return self._cache
        h = Hyperparams.from_vector(x)

        # regression heads share one noisy gram
        Kf = gram(self.F, None, h)
        Ky = Kf.copy()
        Ky[np.diag_indices_from(Ky)] += h.sigma_y2
        L, jitter = robust_cholesky(Ky)
        n = Ky.shape[0]
        A = cho_solve((L, True), self.targets.T)
        Kinv = cho_solve((L, True), np.eye(n))
        n_heads = self.targets.shape[0]
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        z_reg = 0.5 * np.einsum("nm,mn->", self.targets, A) + 0.5 * n_heads * logdet
        G_reg = 0.5 * n_heads * Kinv - 0.5 * A @ A.T
        grad = grad_contraction(G_reg, self.F, None, Kf, h, noise=True)

        # ranking: only support vectors contribute
        act = self.alpha > 0
        a = self.alpha[act]
        z_rank = -self.alpha.sum()
        if a.size:
            Dv = self.differences.vectors[act]
            KDf = gram(Dv, None, h)
            z_rank += 0.5 * (a @ KDf @ a + h.sigma_y2 * a @ a)
            grad += grad_contraction(0.5 * np.outer(a, a), Dv, None, KDf, h, noise=True)

        z_clu = 0.0
        if self.cluster_weight != 0.0:
            Kpp, Kpm = _block_grams(self.F_high, self.F_poor, h)
            z_clu = self.cluster_weight * (np.sum(Kpp ** 2) - np.sum(Kpm ** 2))
            grad += self.cluster_weight * (
                _block_grad(2.0 * Kpp * Kpp, self.F_high, self.F_high, h)
                + _block_grad(-2.0 * Kpm * Kpm, self.F_high, self.F_poor, h))

        z = float(z_reg + z_rank + z_clu)
        self._key = key
        self._cache = (z, grad)
        return self._cache


@dataclass
class JointConfig:
    C: float = 1.0
    max_cycles: int = 20
    tol: float = 1e-3
    scg_iters: int = 50
    cluster_weight: float = 1.0
    dual_tol: float = 1e-5
    dual_max_sweeps: int = 500


@dataclass
class TrainedModel:
    hyperparams: Hyperparams
    heads: list
    rank: RankModel
    stats: StandardizationStats
    # standardized low-image training features, needed for k_* at test time
    train_features: np.ndarray
    config: JointConfig = field(default_factory=JointConfig)
    traversal: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    version: int = MODEL_VERSION

    @property
    def differences(self):
        return self.rank.differences


def initial_hyperparams(targets, dim):
    """theta = 1/D, sf2 = mean target variance over heads, sy2 = 0.1 sf2."""
    var = float(np.mean(np.var(np.atleast_2d(targets), axis=1)))
    if not var > 0:
        var = 1.0
    return Hyperparams.from_natural(var, np.full(dim, 1.0 / dim), 0.1 * var)


def _train_cycles(obj, dset, h, config):
    history = []
    alpha = None
    z_prev = None
    for cycle in range(1, config.max_cycles + 1):
        rank = solve_dual(dset, h, config.C, config.dual_tol, config.dual_max_sweeps, alpha0=alpha)
        alpha = rank.alpha
        obj.alpha = alpha
        z_start = obj.value(h.to_vector())
        res = scg_minimize(obj.value, obj.grad, h.to_vector(), max_iter=config.scg_iters,
                           grad_tol=1e-6)
        h = Hyperparams.from_vector(res.x)
        z = float(res.fun)
        record = {"cycle": cycle, "z_after_alpha": z_start, "z": z,
                  "delta_z": None if z_prev is None else z - z_prev,
                  "scg_iters": res.n_iter, "n_support": int(np.count_nonzero(alpha)),
                  "h_step_monotone": bool(np.all(np.diff(res.history) <= 0))}
        history.append(record)
        log.info("cycle %2d  Z=%.6f  (after alpha step %.6f)  scg=%d  sv=%d", cycle, z,
                 z_start, res.n_iter, record["n_support"])
        if z_prev is not None and abs(z - z_prev) < config.tol:
            break
        z_prev = z
    return h, alpha, history


def train_joint(F_low, F_high, F_poor, targets, config=None):
    """Fit the joint model on raw (unstandardized) features.

    ``F_low`` is (N, D); ``F_high`` / ``F_poor`` are (N, p, D); ``targets``
    is (N, 3) holding the first high-quality counterpart's parameters.
    """
    config = config or JointConfig()
    F_low = np.atleast_2d(np.asarray(F_low, dtype=np.float64))
    F_high = np.asarray(F_high, dtype=np.float64)
    F_poor = np.asarray(F_poor, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    n, dim = F_low.shape
    if n < 2:
        raise ValueError("need at least two low-quality images")
    if F_high.ndim != 3 or F_high.shape[:1] != (n,) or F_high.shape != F_poor.shape \
            or F_high.shape[1] < 1:
        raise ValueError(f"ragged counterpart counts: high {F_high.shape}, poor {F_poor.shape}")
    if targets.shape != (n, 3):
        raise ValueError(f"targets must be (N, 3), got {targets.shape}")
    allf = np.concatenate([F_low, F_high.reshape(-1, dim), F_poor.reshape(-1, dim)])
    if np.all(np.ptp(allf, axis=0) == 0):
        raise ValueError("degenerate training set")

    stats = fit_standardization(allf)
    Fs = apply_standardization(stats, F_low)
    Hs = apply_standardization(stats, F_high)
    Ps = apply_standardization(stats, F_poor)
    dset = build_differences(Fs, Hs, Ps)

    centred = (targets - targets.mean(axis=0)).T
    h = initial_hyperparams(centred, dim)
    obj = JointObjective(Fs, Hs, Ps, centred, dset, cluster_weight=config.cluster_weight)
    h, alpha, history = _train_cycles(obj, dset, h, config)

    # re-solve alpha so the stored ranker matches the final kernel
    rank = solve_dual(dset, h, config.C, config.dual_tol, config.dual_max_sweeps, alpha0=alpha)
    heads = [fit_head(Fs, targets[:, m], h, target_index=m) for m in range(3)]
    return TrainedModel(h, heads, rank, stats, Fs, config, history=history)
