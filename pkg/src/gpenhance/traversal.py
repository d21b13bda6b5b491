"""
Test-time use of a trained model: predict parameter means and deviations,
walk the parameter space along the deviation direction, render the
candidates and rank them.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .features import (PARAM_CEIL, PARAM_FLOOR, ParamVector, apply_standardization,
                       check_image, extract_features, measure_params)
from .gp import predict_batch
from .imaging import retarget
from .ranking import quality_score

__all__ = ["TraversalConfig", "ParamGrid", "Candidate", "EnhanceResult",
           "predict_params", "predict_params_batch", "param_bounds", "gen_param_grid", "enhance"]

log = logging.getLogger(__name__)


@dataclass
class TraversalConfig:
    count: int = 32
    decrease_limits: tuple = (0.15, 0.15, 0.05)
    increase_limits: tuple = (0.35, 0.35, 0.20)
    floor: tuple = tuple(PARAM_FLOOR)
    ceil: tuple = tuple(PARAM_CEIL)

    def validate(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if min(self.decrease_limits) < 0 or min(self.increase_limits) < 0:
            raise ValueError("limits must be nonnegative")
        return self

    def to_dict(self):
        return {"count": int(self.count),
                "decrease_limits": [float(x) for x in self.decrease_limits],
                "increase_limits": [float(x) for x in self.increase_limits],
                "floor": [float(x) for x in self.floor],
                "ceil": [float(x) for x in self.ceil]}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["count"]), tuple(d["decrease_limits"]), tuple(d["increase_limits"]),
                   tuple(d["floor"]), tuple(d["ceil"]))


def predict_params_batch(model, F_raw):
    """Means and standard deviations, each (k, 3), for raw feature rows."""
    Fs = apply_standardization(model.stats, np.atleast_2d(F_raw))
    means, sds = [], []
    for head in model.heads:
        mu, var = predict_batch(head, model.train_features, Fs, model.hyperparams)
        means.append(mu)
        sds.append(np.sqrt(var))
    return np.stack(means, axis=1), np.stack(sds, axis=1)


def predict_params(model, f_low):
    """(m, s) as ParamVectors for one raw feature vector."""
    m, s = predict_params_batch(model, np.asarray(f_low)[None, :])
    return ParamVector(*m[0]), ParamVector(*s[0])


def param_bounds(y_low, cfg):
    y_low = np.asarray(y_low, dtype=np.float64)
    lower = np.maximum(np.asarray(cfg.floor), (1.0 - np.asarray(cfg.decrease_limits)) * y_low)
    upper = np.minimum(np.asarray(cfg.ceil), (1.0 + np.asarray(cfg.increase_limits)) * y_low)
    return lower, np.maximum(upper, lower)


@dataclass
class ParamGrid:
    candidates: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    stride: float
    n_duplicates: int = 0
    zero_stride: bool = False


def gen_param_grid(m, s, y_low, cfg=None):
    """Candidate parameter vectors around the predicted mean.

    The mean (clipped into the bounds) comes first, followed by
    m + mu*s, m - mu*s, m + 2mu*s, ...; for an even count one extra
    positive stride closes the list.  mu makes the largest positive stride
    reach the first upper bound along s; when the mean already sits on an
    upper bound the lower bound sets the span instead.
    """
    cfg = (cfg or TraversalConfig()).validate()
    m = np.asarray(m, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if np.any(s < 0):
        raise ValueError("standard deviations must be nonnegative")
    lower, upper = param_bounds(y_low, cfg)
    centre = np.clip(m, lower, upper)

    n_pairs = (cfg.count - 1) // 2
    extra = cfg.count % 2 == 0
    t_max = n_pairs + int(extra)
    # coordinates that can move at all
    live = (s > 0) & (upper > lower)
    if not np.any(live) or t_max == 0:
        if not np.any(s > 0):
            log.warning("zero predicted deviation; emitting the mean only")
        return ParamGrid(centre[None, :], lower, upper, 0.0, 0, not np.any(s > 0))

    span = np.min((upper[live] - centre[live]) / s[live])
    if span <= 0:
        span = np.min((centre[live] - lower[live]) / s[live])
    mu = span / t_max

    steps = [0]
    for t in range(1, n_pairs + 1):
        steps += [t, -t]
    if extra:
        steps.append(t_max)
    raw = centre[None, :] + np.asarray(steps, dtype=float)[:, None] * mu * s[None, :]
    cand = np.clip(raw, lower, upper)

    keep, seen = [], set()
    for row in cand:
        key = tuple(np.round(row, 12))
        if key not in seen:
            seen.add(key)
            keep.append(row)
    n_dup = len(cand) - len(keep)
    if n_dup:
        log.info("dropped %d duplicate candidates after clipping", n_dup)
    return ParamGrid(np.array(keep), lower, upper, float(mu), n_dup, False)


@dataclass
class Candidate:
    image: np.ndarray
    params: ParamVector
    measured: ParamVector
    quality: float
    clipped: bool = False


@dataclass
class EnhanceResult:
    candidates: list
    predicted_mean: ParamVector
    predicted_sd: ParamVector
    original_params: ParamVector
    grid: ParamGrid
    failures: list = field(default_factory=list)

    @property
    def best(self):
        return self.candidates[0]


def enhance(model, image, cfg=None):
    """Render and rank enhancement candidates for ``image``.

    Candidates whose target cannot be reached from a degenerate image are
    skipped and listed in ``failures``; if every candidate fails a
    RuntimeError is raised.
    """
    if cfg is None:
        cfg = TraversalConfig.from_dict(model.traversal) if model.traversal else TraversalConfig()
    img = check_image(image)
    f_low = extract_features(img)
    y_low = measure_params(img)
    m, s = predict_params(model, f_low)
    grid = gen_param_grid(m, s, y_low, cfg)

    rendered, failures = [], []
    for target in grid.candidates:
        try:
            res = retarget(img, target)
        except ValueError as exc:
            failures.append((ParamVector(*target), str(exc)))
            continue
        rendered.append((res, target))
    if not rendered:
        raise RuntimeError(f"all {len(grid.candidates)} candidates failed: {failures[0][1]}")

    F_cand = np.stack([extract_features(r.image) for r, _ in rendered])
    stats = model.stats
    q = np.atleast_1d(quality_score(model.rank, model.hyperparams,
                                    apply_standardization(stats, f_low),
                                    apply_standardization(stats, F_cand)))
    order = np.argsort(-q, kind="stable")
    cands = [Candidate(rendered[i][0].image, ParamVector(*rendered[i][1]), rendered[i][0].params,
                       float(q[i]), rendered[i][0].clipped) for i in order]
    return EnhanceResult(cands, m, s, y_low, grid, failures)
