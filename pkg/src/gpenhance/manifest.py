"""
Dataset manifests.

A manifest is a UTF-8 JSON document listing low-quality images with their
p high-quality and p poor-quality counterparts, every image carrying its
measured parameters::

    {
      "format": "gpenhance-manifest",
      "version": 1,
      "p": 2,
      "entries": [
        {"id": "img_000",
         "low":  {"path": "low/img_000.png",
                  "params": {"saturation": 0.2, "brightness": 0.4, "contrast": 0.08}},
         "high": [{"path": ..., "params": ...}, ...],
         "poor": [{"path": ..., "params": ...}, ...]}
      ]
    }

Relative paths resolve against the manifest's directory.
"""
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .features import PARAM_CEIL, PARAM_FLOOR, ParamVector

__all__ = ["SchemaError", "VersionMismatchError", "ImageRecord", "ManifestEntry",
           "DatasetManifest", "load_manifest", "save_manifest", "read_png", "write_png",
           "atomic_write_bytes"]

MANIFEST_FORMAT = "gpenhance-manifest"
MANIFEST_VERSION = 1
_PARAM_KEYS = ("saturation", "brightness", "contrast")


class SchemaError(ValueError):
    """A manifest or model file does not match its schema."""


class VersionMismatchError(SchemaError):
    pass


@dataclass(frozen=True)
class ImageRecord:
    path: Path
    params: ParamVector


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    low: ImageRecord
    high: tuple
    poor: tuple


@dataclass(frozen=True)
class DatasetManifest:
    p: int
    entries: tuple
    version: int = MANIFEST_VERSION

    def __len__(self):
        return len(self.entries)


def read_png(path):
    """8-bit RGB PNG -> float array in [0, 1]."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def to_uint8(image):
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_png(path, image):
    buf = io.BytesIO()
    Image.fromarray(to_uint8(image), mode="RGB").save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _params_to_json(params):
    return {k: float(v) for k, v in zip(_PARAM_KEYS, params)}


def _record_to_json(rec, base):
    path = Path(rec.path).resolve()
    try:
        path = path.relative_to(base)
    except ValueError:
        pass
    return {"path": path.as_posix(), "params": _params_to_json(rec.params)}


def manifest_to_json(manifest, base):
    entries = []
    for e in manifest.entries:
        entries.append({
            "id": e.id,
            "low": _record_to_json(e.low, base),
            "high": [_record_to_json(r, base) for r in e.high],
            "poor": [_record_to_json(r, base) for r in e.poor],
        })
    return {"format": MANIFEST_FORMAT, "version": manifest.version, "p": manifest.p,
            "entries": entries}


def save_manifest(manifest, path):
    path = Path(path)
    doc = manifest_to_json(manifest, path.parent.resolve())
    atomic_write_bytes(path, (json.dumps(doc, indent=2) + "\n").encode("utf-8"))


def _parse_record(obj, where, base, check_paths):
    if not isinstance(obj, dict) or set(obj) != {"path", "params"}:
        raise SchemaError(f"{where}: expected an object with fields 'path' and 'params'")
    if not isinstance(obj["path"], str):
        raise SchemaError(f"{where}.path: expected a string")
    pr = obj["params"]
    if not isinstance(pr, dict) or set(pr) != set(_PARAM_KEYS):
        raise SchemaError(f"{where}.params: expected fields {', '.join(_PARAM_KEYS)}")
    vals = []
    for k, lo, hi in zip(_PARAM_KEYS, PARAM_FLOOR, PARAM_CEIL):
        v = pr[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not (lo <= v <= hi):
            raise SchemaError(f"{where}.params.{k}: expected a number in [{lo:g}, {hi:g}], got {v!r}")
        vals.append(float(v))
    path = Path(obj["path"])
    if not path.is_absolute():
        path = base / path
    if check_paths and not path.is_file():
        raise SchemaError(f"{where}.path: file not found: {path}")
    return ImageRecord(path, ParamVector(*vals))


def _entry_line(text, entry):
    # best effort: the line holding this entry's id
    if text is None or not isinstance(entry, dict) or "id" not in entry:
        return None
    needle = f'"id": {json.dumps(entry["id"])}'
    pos = text.find(needle)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def parse_manifest(doc, base, check_paths=True, text=None):
    if not isinstance(doc, dict):
        raise SchemaError("manifest: expected a JSON object")
    if doc.get("format") != MANIFEST_FORMAT:
        raise SchemaError(f"format: expected {MANIFEST_FORMAT!r}, got {doc.get('format')!r}")
    if doc.get("version") != MANIFEST_VERSION:
        raise VersionMismatchError(f"version: expected {MANIFEST_VERSION}, got {doc.get('version')!r}")
    extra = set(doc) - {"format", "version", "p", "entries"}
    if extra:
        raise VersionMismatchError(f"unknown fields for manifest version {MANIFEST_VERSION}: "
                                   f"{', '.join(sorted(extra))}")
    p = doc.get("p")
    if isinstance(p, bool) or not isinstance(p, int) or p < 1:
        raise SchemaError(f"p: expected a positive integer, got {p!r}")
    raw = doc.get("entries")
    if not isinstance(raw, list) or not raw:
        raise SchemaError("entries: expected a nonempty list")
    entries = []
    for i, e in enumerate(raw):
        try:
            entries.append(_parse_entry(e, f"entries[{i}]", p, base, check_paths))
        except SchemaError as exc:
            line = _entry_line(text, e)
            if line is None:
                raise
            raise SchemaError(f"{exc} (line {line})") from None
    return DatasetManifest(p, tuple(entries))


def _parse_entry(e, where, p, base, check_paths):
    if not isinstance(e, dict) or set(e) != {"id", "low", "high", "poor"}:
        raise SchemaError(f"{where}: expected fields id, low, high, poor")
    for kind in ("high", "poor"):
        if not isinstance(e[kind], list) or len(e[kind]) != p:
            n = len(e[kind]) if isinstance(e[kind], list) else "no"
            raise SchemaError(f"{where}.{kind} (id {e['id']!r}): expected {p} counterparts, got {n}")
    return ManifestEntry(
        str(e["id"]),
        _parse_record(e["low"], f"{where}.low", base, check_paths),
        tuple(_parse_record(r, f"{where}.high[{j}]", base, check_paths)
              for j, r in enumerate(e["high"])),
        tuple(_parse_record(r, f"{where}.poor[{j}]", base, check_paths)
              for j, r in enumerate(e["poor"])))


def load_manifest(path, check_paths=True):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_manifest(doc, path.parent.resolve(), check_paths, text)
