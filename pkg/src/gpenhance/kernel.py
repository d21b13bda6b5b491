"""
Squared-exponential ARD covariance

    k(f_i, f_j) = sf2 * exp(-0.5 * sum_d theta_d (f_i - f_j)_d^2) + sy2 * [i == j]

with every hyperparameter stored as a log so that positivity needs no
constraints.  The Kronecker term is tied to index identity inside a single
input set: cross-set grams never carry noise.
"""
from dataclasses import dataclass

import numpy as np

__all__ = ["Hyperparams", "kernel_eval", "sq_dist", "gram", "gram_grads",
           "grad_contraction"]


@dataclass(frozen=True)
class Hyperparams:
    log_sigma_f2: float
    log_theta: np.ndarray
    log_sigma_y2: float

    def __post_init__(self):
        object.__setattr__(self, "log_sigma_f2", float(self.log_sigma_f2))
        object.__setattr__(self, "log_sigma_y2", float(self.log_sigma_y2))
        object.__setattr__(self, "log_theta",
                           np.array(self.log_theta, dtype=np.float64).ravel())
        if not (np.isfinite(self.log_sigma_f2) and np.isfinite(self.log_sigma_y2)
                and np.all(np.isfinite(self.log_theta))):
            raise ValueError("hyperparameters must be finite")
        if self.log_theta.size == 0:
            raise ValueError("need at least one ARD weight")

    @classmethod
    def from_natural(cls, sigma_f2, theta, sigma_y2):
        return cls(np.log(sigma_f2), np.log(np.asarray(theta, dtype=np.float64)),
                   np.log(sigma_y2))

    @classmethod
    def from_vector(cls, x):
        """Inverse of :meth:`to_vector`: ``[log sf2, log theta..., log sy2]``."""
        x = np.asarray(x, dtype=np.float64)
        return cls(x[0], x[1:-1], x[-1])

    def to_vector(self):
        return np.concatenate([[self.log_sigma_f2], self.log_theta, [self.log_sigma_y2]])

    @property
    def dim(self):
        return self.log_theta.size

    @property
    def sigma_f2(self):
        return float(np.exp(self.log_sigma_f2))

    @property
    def sigma_y2(self):
        return float(np.exp(self.log_sigma_y2))

    @property
    def theta(self):
        return np.exp(self.log_theta)


def kernel_eval(fi, fj, h):
    """Noise-free kernel value between two feature vectors."""
    fi = np.asarray(fi, dtype=np.float64)
    fj = np.asarray(fj, dtype=np.float64)
    if fi.shape != fj.shape or fi.shape != (h.dim,):
        raise ValueError(f"dimension mismatch: {fi.shape}, {fj.shape}, D={h.dim}")
    d = fi - fj
    return h.sigma_f2 * float(np.exp(-0.5 * np.dot(h.theta * d, d)))


def sq_dist(A, B, theta, same=False):
    """theta-weighted squared distances between rows of A and rows of B."""
    As = A * np.sqrt(theta)
    Bs = As if same else B * np.sqrt(theta)
    a2 = np.einsum("ij,ij->i", As, As)
    b2 = a2 if same else np.einsum("ij,ij->i", Bs, Bs)
    r2 = a2[:, None] + b2[None, :] - 2.0 * As @ Bs.T
    np.maximum(r2, 0.0, out=r2)
    if same:
        r2 = 0.5 * (r2 + r2.T)
        np.fill_diagonal(r2, 0.0)
    return r2


def _as_set(A, h):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.shape[1] != h.dim:
        raise ValueError(f"dimension mismatch: inputs have {A.shape[1]} columns, D={h.dim}")
    return A


def gram(A, B, h, add_noise=False):
    """Kernel matrix between the rows of A and B.

    Pass ``B=None`` for the symmetric gram of A with itself; only then may
    ``add_noise`` put sy2 on the diagonal.
    """
    A = _as_set(A, h)
    same = B is None or B is A
    if add_noise and not same:
        raise ValueError("noise can only be added to the gram of a set with itself")
    Bm = A if same else _as_set(B, h)
    K = h.sigma_f2 * np.exp(-0.5 * sq_dist(A, Bm, h.theta, same=same))
    if add_noise:
        K[np.diag_indices_from(K)] += h.sigma_y2
    return K


def gram_grads(A, h, noise=True):
    """Derivatives of the gram of A w.r.t. the log hyperparameters.

    Returns ``(dK_dlog_sf2, dK_dlog_theta, dK_dlog_sy2)``; the middle entry
    has shape (D, n, n).  Memory is O(D n^2): meant for small sets.  Large
    problems go through :func:`grad_contraction` instead.
    """
    A = _as_set(A, h)
    K = gram(A, None, h)
    diff2 = (A[:, None, :] - A[None, :, :]) ** 2
    d_theta = -0.5 * h.theta[:, None, None] * np.moveaxis(diff2, 2, 0) * K[None]
    d_sy2 = h.sigma_y2 * np.eye(A.shape[0]) if noise else np.zeros_like(K)
    return K.copy(), d_theta, d_sy2


def grad_contraction(G, A, B, K, h, noise=False):
    """Gradient of tr(G^T K) w.r.t. the log hyperparameters, without
    materialising the D derivative matrices.

    ``K`` is the noise-free gram between A and B (B is None for A with
    itself) and ``G`` the upstream derivative dZ/dK of the same shape.
    """
    W = G * K
    same = B is None
    Bm = A if same else B
    rows = W.sum(axis=1)
    cols = W.sum(axis=0)
    # sum_ij W_ij (a_iq - b_jq)^2 for every q
    t = rows @ (A * A) + cols @ (Bm * Bm) - 2.0 * np.einsum("iq,iq->q", A, W @ Bm)
    grad = np.empty(h.dim + 2)
    grad[0] = W.sum()
    grad[1:-1] = -0.5 * h.theta * t
    grad[-1] = h.sigma_y2 * np.trace(G) if noise else 0.0
    return grad
