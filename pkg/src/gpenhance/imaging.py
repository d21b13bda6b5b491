"""Global saturation / brightness / contrast edits in HSV space."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .features import ParamVector, check_image, hsv_to_rgb, rgb_to_hsv, _params_from_hsv

__all__ = ["AdjustmentMultipliers", "RetargetResult", "apply_adjustment",
           "retarget", "degrade", "DEGRADE_LOW", "DEGRADE_HIGH"]

DEGRADE_LOW = (0.3, 0.6)
DEGRADE_HIGH = (1.7, 2.2)


class AdjustmentMultipliers(NamedTuple):
    saturation: float = 1.0
    brightness: float = 1.0
    contrast: float = 1.0


def _check_multipliers(m):
    m = AdjustmentMultipliers(*(float(x) for x in m))
    if not all(np.isfinite(x) and x > 0 for x in m):
        raise ValueError(f"multipliers must be finite and positive, got {tuple(m)}")
    return m


def _adjust_hsv(hsv, m):
    out = hsv.copy()
    out[..., 1] = np.clip(out[..., 1] * m.saturation, 0.0, 1.0)
    v = np.clip(out[..., 2] * m.brightness, 0.0, 1.0)
    mu = v.mean()
    out[..., 2] = np.clip(mu + (v - mu) * m.contrast, 0.0, 1.0)
    return out


def apply_adjustment(image, m):
    """Scale saturation, then brightness, then contrast about the mean V.

    Each step clips to [0, 1].  ``m`` is anything unpacking to three
    positive multipliers, identity being ``(1, 1, 1)``.
    """
    img = check_image(image)
    m = _check_multipliers(m)
    return hsv_to_rgb(_adjust_hsv(rgb_to_hsv(img), m))


def _render(hsv, delta):
    # measure the RGB output: black pixels lose their saturation on the way back
    rgb = hsv_to_rgb(_adjust_hsv(hsv, AdjustmentMultipliers(*delta)))
    return rgb, np.asarray(_params_from_hsv(rgb_to_hsv(rgb)))


@dataclass
class RetargetResult:
    image: np.ndarray
    params: ParamVector
    multipliers: AdjustmentMultipliers
    clipped: bool


def retarget(image, target, tol=0.02, refinements=3):
    """Adjust ``image`` so that its measured parameters approach ``target``.

    Multipliers start at target/current and are refined multiplicatively
    from the measured output, always re-applied to the original image.
    ``clipped`` is set when some coordinate ends further than ``tol`` from
    its target, which only happens when clipping makes it unreachable.
    """
    img = check_image(image)
    target = np.asarray(target, dtype=np.float64)
    hsv = rgb_to_hsv(img)
    current = np.asarray(_params_from_hsv(hsv))

    degenerate = current <= 0
    if np.any(degenerate & (np.abs(target) > 1e-12)):
        raise ValueError("unreachable target from degenerate image")
    delta = np.where(degenerate, 1.0, target / np.where(degenerate, 1.0, current))
    # a zero target would need a zero multiplier
    delta = np.maximum(delta, 1e-6)

    rgb, measured = _render(hsv, delta)
    for _ in range(refinements):
        if np.all(np.abs(measured - target) < 1e-4):
            break
        ratio = np.where(measured > 0, target / np.where(measured > 0, measured, 1.0), 1.0)
        delta = np.maximum(np.where(degenerate, 1.0, delta * ratio), 1e-6)
        rgb, measured = _render(hsv, delta)

    clipped = bool(np.any(np.abs(measured - target) > tol))
    return RetargetResult(rgb, ParamVector(*measured),
                          AdjustmentMultipliers(*delta), clipped)


def degrade_multipliers(seed, low=DEGRADE_LOW, high=DEGRADE_HIGH):
    """Per-parameter multipliers drawn from one of the two extreme intervals."""
    rng = np.random.default_rng(seed)
    sides = rng.random(3) < 0.5
    lo = rng.uniform(low[0], low[1], size=3)
    hi = rng.uniform(high[0], high[1], size=3)
    return AdjustmentMultipliers(*np.where(sides, lo, hi))


def degrade(image, seed, low=DEGRADE_LOW, high=DEGRADE_HIGH):
    """Synthesize a poor-quality version by pushing parameters to extremes."""
    return apply_adjustment(image, degrade_multipliers(seed, low, high))
