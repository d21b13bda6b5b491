"""
Model files.

A model is one UTF-8 JSON document with named fields.  Dense arrays are
stored as ``{"dtype": "<f8", "shape": [...], "data": <base64>}`` holding
little-endian float64 values in C order, so files are byte-portable.
Writes go through a temporary file and an atomic rename.
"""
import base64
import json
from pathlib import Path

import numpy as np

from .features import StandardizationStats
from .gp import GPHead
from .joint import MODEL_VERSION, JointConfig, TrainedModel
from .kernel import Hyperparams
from .manifest import SchemaError, VersionMismatchError, atomic_write_bytes
from .ranking import DifferenceSet, RankModel

__all__ = ["MODEL_FORMAT", "model_to_json", "model_from_json", "save_model", "load_model",
           "encode_array", "decode_array"]

MODEL_FORMAT = "gpenhance-model"

_TOP = {"format", "version", "hyperparams", "standardization", "train_features", "heads",
        "ranking", "config", "traversal", "history"}


def encode_array(a):
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"dtype": "<f8", "shape": list(a.shape),
            "data": base64.b64encode(a.tobytes()).decode("ascii")}


def decode_array(obj, where, shape=None):
    if not isinstance(obj, dict) or set(obj) != {"dtype", "shape", "data"}:
        raise SchemaError(f"{where}: expected an encoded array (dtype, shape, data)")
    if obj["dtype"] != "<f8":
        raise SchemaError(f"{where}.dtype: only '<f8' is supported, got {obj['dtype']!r}")
    shp = obj["shape"]
    if not isinstance(shp, list) or not all(isinstance(n, int) and n >= 0 for n in shp):
        raise SchemaError(f"{where}.shape: expected a list of nonnegative integers")
    try:
        raw = base64.b64decode(obj["data"], validate=True)
    except (ValueError, TypeError):
        raise SchemaError(f"{where}.data: invalid base64") from None
    n = int(np.prod(shp)) if shp else 1
    if len(raw) != 8 * n:
        raise SchemaError(f"{where}.data: expected {8 * n} bytes for shape {shp}, got {len(raw)}")
    arr = np.frombuffer(raw, dtype="<f8").reshape(shp).astype(np.float64)
    if shape is not None and arr.shape != tuple(shape):
        raise SchemaError(f"{where}.shape: expected {tuple(shape)}, got {arr.shape}")
    return arr


def model_to_json(model):
    h = model.hyperparams
    rank = model.rank
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "hyperparams": {"log_sigma_f2": h.log_sigma_f2, "log_sigma_y2": h.log_sigma_y2,
                        "log_theta": encode_array(h.log_theta)},
        "standardization": {"mean": encode_array(model.stats.mean),
                            "scale": encode_array(model.stats.scale)},
        "train_features": encode_array(model.train_features),
        "heads": [{"target_index": hd.target_index, "target_mean": hd.target_mean,
                   "jitter": hd.jitter, "targets": encode_array(hd.targets),
                   "weights": encode_array(hd.weights),
                   "cholesky_factor": encode_array(hd.cholesky_factor)} for hd in model.heads],
        "ranking": {"C": rank.C, "sweeps": rank.sweeps, "kkt": rank.kkt,
                    "alpha": encode_array(rank.alpha),
                    "differences": encode_array(rank.differences.vectors),
                    "provenance": [list(p) for p in rank.differences.provenance]},
        "config": dict(vars(model.config)),
        "traversal": dict(model.traversal),
        "history": list(model.history),
    }


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}.{key}: missing field" if where else f"{key}: missing field")
    return obj[key]


def _number(obj, key, where):
    v = _field(obj, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise SchemaError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def model_from_json(doc):
    if not isinstance(doc, dict):
        raise SchemaError("model: expected a JSON object")
    if doc.get("format") != MODEL_FORMAT:
        raise SchemaError(f"format: expected {MODEL_FORMAT!r}, got {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise VersionMismatchError(f"version: expected {MODEL_VERSION}, got {doc.get('version')!r}")
    extra = set(doc) - _TOP
    if extra:
        raise VersionMismatchError(f"unknown fields for model version {MODEL_VERSION}: "
                                   f"{', '.join(sorted(extra))}")

    hp = _field(doc, "hyperparams", "")
    log_theta = decode_array(_field(hp, "log_theta", "hyperparams"), "hyperparams.log_theta")
    if log_theta.ndim != 1 or log_theta.size == 0:
        raise SchemaError("hyperparams.log_theta: expected a nonempty vector")
    dim = log_theta.size
    h = Hyperparams(_number(hp, "log_sigma_f2", "hyperparams"), log_theta,
                    _number(hp, "log_sigma_y2", "hyperparams"))

    sd = _field(doc, "standardization", "")
    stats = StandardizationStats(
        decode_array(_field(sd, "mean", "standardization"), "standardization.mean", (dim,)),
        decode_array(_field(sd, "scale", "standardization"), "standardization.scale", (dim,)))
    if np.any(stats.scale <= 0):
        raise SchemaError("standardization.scale: entries must be positive")

    F = decode_array(_field(doc, "train_features", ""), "train_features")
    if F.ndim != 2 or F.shape[1] != dim or F.shape[0] < 1:
        raise SchemaError(f"train_features.shape: expected (N, {dim}), got {F.shape}")
    n = F.shape[0]

    raw_heads = _field(doc, "heads", "")
    if not isinstance(raw_heads, list) or len(raw_heads) != 3:
        raise SchemaError("heads: expected a list of 3 regression heads")
    heads = []
    for m, hd in enumerate(raw_heads):
        w = f"heads[{m}]"
        idx = _field(hd, "target_index", w)
        if idx != m:
            raise SchemaError(f"{w}.target_index: expected {m}, got {idx!r}")
        heads.append(GPHead(m, decode_array(_field(hd, "targets", w), f"{w}.targets", (n,)),
                            _number(hd, "target_mean", w),
                            decode_array(_field(hd, "cholesky_factor", w), f"{w}.cholesky_factor", (n, n)),
                            decode_array(_field(hd, "weights", w), f"{w}.weights", (n,)),
                            _number(hd, "jitter", w)))

    rk = _field(doc, "ranking", "")
    vectors = decode_array(_field(rk, "differences", "ranking"), "ranking.differences")
    if vectors.ndim != 2 or vectors.shape[1] != dim:
        raise SchemaError(f"ranking.differences.shape: expected (N', {dim}), got {vectors.shape}")
    alpha = decode_array(_field(rk, "alpha", "ranking"), "ranking.alpha", (vectors.shape[0],))
    C = _number(rk, "C", "ranking")
    if np.any(alpha < 0) or np.any(alpha > C):
        raise SchemaError("ranking.alpha: entries must lie in [0, C]")
    prov = _field(rk, "provenance", "ranking")
    if not isinstance(prov, list) or len(prov) != vectors.shape[0]:
        raise SchemaError("ranking.provenance: expected one tag per difference vector")
    dset = DifferenceSet(vectors, [tuple(p) for p in prov])
    rank = RankModel(alpha, C, dset, int(_number(rk, "sweeps", "ranking")),
                     _number(rk, "kkt", "ranking"))

    cfg_raw = _field(doc, "config", "")
    try:
        config = JointConfig(**cfg_raw)
    except TypeError as exc:
        raise SchemaError(f"config: {exc}") from None
    traversal = _field(doc, "traversal", "")
    history = _field(doc, "history", "")
    if not isinstance(traversal, dict) or not isinstance(history, list):
        raise SchemaError("traversal/history: expected an object and a list")
    return TrainedModel(h, heads, rank, stats, F, config, traversal, history, MODEL_VERSION)


def save_model(model, path):
    text = json.dumps(model_to_json(model), indent=1, allow_nan=False) + "\n"
    atomic_write_bytes(Path(path), text.encode("utf-8"))


def load_model(path):
    """Read and validate a model file; nothing is returned on any error."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError:
        raise SchemaError(f"{path}: not UTF-8 text") from None
    return model_from_json(doc)
