"""Procedural low / high / poor image triples for desk-scale experiments."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import zoom

from .features import hsv_to_rgb, measure_params
from .imaging import DEGRADE_HIGH, DEGRADE_LOW, apply_adjustment, degrade
from .manifest import (DatasetManifest, ImageRecord, ManifestEntry, save_manifest,
                       to_uint8, write_png)

__all__ = ["SyntheticDatasetConfig", "base_image", "gen_synthetic_dataset"]

# ranges must stay this far from the identity multiplier
MIN_SEPARATION = 0.05


@dataclass
class SyntheticDatasetConfig:
    n_images: int = 40
    image_size: int = 48
    p: int = 2
    # (saturation, brightness, contrast) multiplier intervals for experts
    enhance_ranges: tuple = ((1.15, 1.35), (1.15, 1.35), (1.08, 1.2))
    degrade_low: tuple = DEGRADE_LOW
    degrade_high: tuple = DEGRADE_HIGH
    seed: int = 0

    def validate(self):
        if self.n_images < 1:
            raise ValueError("n_images must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.image_size < 12:
            raise ValueError("image_size must be >= 12")
        if len(self.enhance_ranges) != 3:
            raise ValueError("need one enhance range per parameter")
        for name, (lo, hi) in [("enhance", r) for r in self.enhance_ranges] + [
                ("degrade_low", self.degrade_low), ("degrade_high", self.degrade_high)]:
            if not 0 < lo <= hi:
                raise ValueError(f"{name} range must satisfy 0 < lo <= hi, got ({lo}, {hi})")
            if lo < 1 + MIN_SEPARATION and hi > 1 - MIN_SEPARATION:
                raise ValueError(f"{name} range ({lo}, {hi}) is within {MIN_SEPARATION} of 1")
        return self


def _smooth_noise(rng, size, cells):
    coarse = rng.uniform(-1.0, 1.0, size=(cells + 1, cells + 1))
    out = zoom(coarse, size / (cells + 1), order=1, mode="nearest", grid_mode=True)
    return out[:size, :size]


def base_image(rng, size):
    """One muted "low-quality" picture: gradients, rectangles and value noise."""
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    angle = rng.uniform(0, 2 * np.pi)
    ramp = np.cos(angle) * (xx - 0.5) + np.sin(angle) * (yy - 0.5)

    hue = np.mod(rng.uniform() + rng.uniform(-0.15, 0.15) * ramp, 1.0)
    sat = np.full((size, size), rng.uniform(0.12, 0.45))
    val = np.full((size, size), rng.uniform(0.25, 0.6))
    amp = rng.uniform(0.04, 0.12)
    val += amp * 1.2 * ramp

    for _ in range(rng.integers(2, 5)):
        r0, c0 = rng.integers(0, size - 4, size=2)
        r1 = r0 + rng.integers(4, size // 2 + 4)
        c1 = c0 + rng.integers(4, size // 2 + 4)
        hue[r0:r1, c0:c1] = np.mod(hue[r0:r1, c0:c1] + rng.uniform(-0.3, 0.3), 1.0)
        sat[r0:r1, c0:c1] *= rng.uniform(0.6, 1.4)
        val[r0:r1, c0:c1] += amp * rng.uniform(-1.0, 1.0)

    val += 0.6 * amp * _smooth_noise(rng, size, int(rng.integers(3, 8)))
    sat *= 1.0 + 0.2 * _smooth_noise(rng, size, int(rng.integers(3, 8)))
    hsv = np.stack([hue, np.clip(sat, 0, 1), np.clip(val, 0.02, 0.98)], axis=-1)
    return hsv_to_rgb(hsv)


def _quantize(image):
    # what lands in the PNG is what gets measured
    return to_uint8(image) / 255.0


def gen_synthetic_dataset(cfg, out_dir):
    """Render ``cfg.n_images`` triples under ``out_dir`` and write
    ``manifest.json`` there.  Returns ``(manifest, manifest_path)``.

    Per-image randomness comes from ``SeedSequence(cfg.seed).spawn`` so
    any image can be regenerated independently of the others.
    """
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_images)
    lo = np.array([r[0] for r in cfg.enhance_ranges])
    hi = np.array([r[1] for r in cfg.enhance_ranges])

    entries = []
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        name = f"img_{i:03d}"
        low = _quantize(base_image(rng, cfg.image_size))
        low_path = out_dir / "low" / f"{name}.png"
        write_png(low_path, low)
        high, poor = [], []
        for j in range(cfg.p):
            img = _quantize(apply_adjustment(low, rng.uniform(lo, hi)))
            path = out_dir / "high" / f"{name}_{j}.png"
            write_png(path, img)
            high.append(ImageRecord(path, measure_params(img)))
        for k in range(cfg.p):
            img = _quantize(degrade(low, int(rng.integers(2**63)), cfg.degrade_low, cfg.degrade_high))
            path = out_dir / "poor" / f"{name}_{k}.png"
            write_png(path, img)
            poor.append(ImageRecord(path, measure_params(img)))
        entries.append(ManifestEntry(name, ImageRecord(low_path, measure_params(low)),
                                     tuple(high), tuple(poor)))

    manifest = DatasetManifest(cfg.p, tuple(entries))
    path = out_dir / "manifest.json"
    save_manifest(manifest, path)
    return manifest, path
