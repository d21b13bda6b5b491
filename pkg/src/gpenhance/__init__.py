"""
Learned photo enhancement with Gaussian processes.

A joint model predicts saturation, brightness and contrast for an image
from its features (three GP regression heads sharing one ARD kernel) and
ranks rendered candidates with a kernel rank-SVM trained on
poor / low / high-quality triples.
"""
from .features import (FEATURE_DIM, ParamVector, StandardizationStats, extract_features,
                       measure_params)
from .gp import GPHead, NotPositiveDefiniteError, fit_head, predict
from .imaging import apply_adjustment, degrade, retarget
from .joint import JointConfig, JointObjective, TrainedModel, train_joint
from .kernel import Hyperparams, gram, kernel_eval
from .manifest import (DatasetManifest, SchemaError, VersionMismatchError, load_manifest,
                       read_png, write_png)
from .modelio import load_model, save_model
from .pipeline import EvalReport, evaluate, load_features, train_from_manifest
from .ranking import build_differences, quality_score, rank_candidates, solve_dual
from .synthetic import SyntheticDatasetConfig, gen_synthetic_dataset
from .traversal import TraversalConfig, enhance, gen_param_grid, predict_params

__version__ = "0.1.0"

__all__ = [
    "FEATURE_DIM", "ParamVector", "StandardizationStats", "extract_features", "measure_params",
    "GPHead", "NotPositiveDefiniteError", "fit_head", "predict",
    "apply_adjustment", "degrade", "retarget",
    "JointConfig", "JointObjective", "TrainedModel", "train_joint",
    "Hyperparams", "gram", "kernel_eval",
    "DatasetManifest", "SchemaError", "VersionMismatchError", "load_manifest", "read_png",
    "write_png", "load_model", "save_model",
    "EvalReport", "evaluate", "load_features", "train_from_manifest",
    "build_differences", "quality_score", "rank_candidates", "solve_dual",
    "SyntheticDatasetConfig", "gen_synthetic_dataset",
    "TraversalConfig", "enhance", "gen_param_grid", "predict_params",
]
