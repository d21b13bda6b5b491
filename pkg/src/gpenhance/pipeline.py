"""Manifest-level training and evaluation."""
from dataclasses import dataclass

import numpy as np

from .features import extract_features
from .joint import JointConfig, train_joint
from .manifest import read_png
from .traversal import TraversalConfig, predict_params_batch

__all__ = ["ManifestFeatures", "load_features", "train_from_manifest", "EvalReport",
           "pearson", "rmse", "evaluate", "evaluate_arrays"]


@dataclass
class ManifestFeatures:
    low: np.ndarray       # (N, D)
    high: np.ndarray      # (N, p, D)
    poor: np.ndarray      # (N, p, D)
    y_low: np.ndarray     # (N, 3)
    y_high: np.ndarray    # (N, p, 3)
    y_poor: np.ndarray    # (N, p, 3)

    @property
    def targets(self):
        """First expert counterpart's parameters, the regression targets."""
        return self.y_high[:, 0, :]


def load_features(manifest):
    low, high, poor = [], [], []
    for e in manifest.entries:
        low.append(extract_features(read_png(e.low.path)))
        high.append([extract_features(read_png(r.path)) for r in e.high])
        poor.append([extract_features(read_png(r.path)) for r in e.poor])
    return ManifestFeatures(
        np.array(low), np.array(high), np.array(poor),
        np.array([e.low.params for e in manifest.entries]),
        np.array([[r.params for r in e.high] for e in manifest.entries]),
        np.array([[r.params for r in e.poor] for e in manifest.entries]))


def train_from_manifest(manifest, config=None, traversal=None, features=None):
    feats = features if features is not None else load_features(manifest)
    model = train_joint(feats.low, feats.high, feats.poor, feats.targets, config or JointConfig())
    model.traversal = (traversal or TraversalConfig()).to_dict()
    return model


@dataclass
class EvalReport:
    rmse: tuple
    # None where a series is constant
    pearson: tuple
    n_test: int

    def to_dict(self):
        names = ("saturation", "brightness", "contrast")
        return {"n_test": self.n_test,
                "rmse": dict(zip(names, map(float, self.rmse))),
                "pearson": dict(zip(names, [None if r is None else float(r) for r in self.pearson]))}


def rmse(pred, truth):
    return float(np.sqrt(np.mean((np.asarray(pred) - np.asarray(truth)) ** 2)))


def pearson(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(xc @ xc)
    sy = np.sqrt(yc @ yc)
    # relative test: float noise on a constant series is still constant
    if sx <= 1e-12 * max(1.0, np.abs(x).max()) or sy <= 1e-12 * max(1.0, np.abs(y).max()):
        return None
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def evaluate_arrays(pred, truth):
    pred = np.atleast_2d(pred)
    truth = np.atleast_2d(truth)
    if pred.shape[0] == 0:
        raise ValueError("no test images")
    return EvalReport(tuple(rmse(pred[:, j], truth[:, j]) for j in range(3)),
                      tuple(pearson(pred[:, j], truth[:, j]) for j in range(3)),
                      int(pred.shape[0]))


def evaluate(model, manifest, features=None):
    """RMSE and Pearson r of predicted means against the first expert."""
    if len(manifest) == 0:
        raise ValueError("no test images")
    feats = features if features is not None else load_features(manifest)
    m, _ = predict_params_batch(model, feats.low)
    return evaluate_arrays(m, feats.targets)
