"""
Image descriptors and global image parameters.

Images are float arrays of shape (height, width, 3) with RGB channels in
[0, 1].  The descriptor is a fixed 867-long vector:

    [0, 432)    joint HSV histogram, 12 hue x 6 saturation x 6 value bins
    [432, 576)  mean saturation of each cell of a 12x12 grid (row-major)
    [576, 720)  mean value of each cell
    [720, 864)  RMS contrast (population std of V) of each cell
    [864, 867)  global (saturation, brightness, contrast)
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "FEATURE_DIM", "GRID", "HIST_BINS", "ParamVector", "StandardizationStats",
    "check_image", "rgb_to_hsv", "hsv_to_rgb", "measure_params",
    "extract_features", "fit_standardization", "apply_standardization",
]

GRID = 12
HIST_BINS = (12, 6, 6)
HIST_DIM = HIST_BINS[0] * HIST_BINS[1] * HIST_BINS[2]
FEATURE_DIM = HIST_DIM + 3 * GRID * GRID + 3

SAT_SLICE = slice(HIST_DIM, HIST_DIM + GRID * GRID)
VAL_SLICE = slice(SAT_SLICE.stop, SAT_SLICE.stop + GRID * GRID)
CON_SLICE = slice(VAL_SLICE.stop, VAL_SLICE.stop + GRID * GRID)
PARAM_SLICE = slice(CON_SLICE.stop, FEATURE_DIM)

# physical ranges of (saturation, brightness, contrast)
PARAM_FLOOR = np.zeros(3)
PARAM_CEIL = np.array([1.0, 1.0, 0.5])


class ParamVector(NamedTuple):
    """Global image parameters: mean S, mean V and population std of V."""
    saturation: float
    brightness: float
    contrast: float


def check_image(image):
    """Validate a raster and return it as a float64 array."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB array, got shape {img.shape}")
    if img.shape[0] < GRID or img.shape[1] < GRID:
        raise ValueError(f"image must be at least {GRID}x{GRID} pixels, got "
                         f"{img.shape[1]}x{img.shape[0]}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("channel values must lie in [0, 1]")
    return img


def rgb_to_hsv(image):
    """Hexcone RGB -> HSV with hue stored as angle/360.

    Achromatic pixels (max == min) get H = 0 and S = 0; black gets S = 0.
    """
    img = np.asarray(image, dtype=np.float64)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    cmax = img.max(axis=-1)
    cmin = img.min(axis=-1)
    delta = cmax - cmin

    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    h = np.zeros_like(cmax)
    rmax = chroma & (cmax == r)
    gmax = chroma & ~rmax & (cmax == g)
    bmax = chroma & ~rmax & ~gmax
    h[rmax] = np.mod((g[rmax] - b[rmax]) / safe[rmax], 6.0)
    h[gmax] = (b[gmax] - r[gmax]) / safe[gmax] + 2.0
    h[bmax] = (r[bmax] - g[bmax]) / safe[bmax] + 4.0
    h = h / 6.0

    s = np.where(cmax > 0, delta / np.where(cmax > 0, cmax, 1.0), 0.0)
    return np.stack([h, s, cmax], axis=-1)


def hsv_to_rgb(hsv):
    """Inverse of :func:`rgb_to_hsv`."""
    hsv = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = np.mod(h, 1.0) * 6.0
    sector = np.floor(h6).astype(int) % 6
    frac = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * frac)
    t = v * (1.0 - s * (1.0 - frac))
    choices_r = [v, q, p, p, t, v]
    choices_g = [t, v, v, q, p, p]
    choices_b = [p, p, t, v, v, q]
    conds = [sector == k for k in range(6)]
    rgb = np.stack([np.select(conds, choices_r),
                    np.select(conds, choices_g),
                    np.select(conds, choices_b)], axis=-1)
    return np.clip(rgb, 0.0, 1.0)


def measure_params(image):
    """Return the global :class:`ParamVector` of an RGB image."""
    hsv = rgb_to_hsv(check_image(image))
    return _params_from_hsv(hsv)


def _params_from_hsv(hsv):
    s = hsv[..., 1]
    v = hsv[..., 2]
    return ParamVector(float(s.mean()), float(v.mean()), float(v.std()))


def _bin_index(x, nbins):
    # equal-width half-open bins on [0, 1], last bin closed
    return np.minimum((x * nbins).astype(int), nbins - 1)


def _cell_edges(n):
    return [(r * n) // GRID for r in range(GRID + 1)]


def extract_features(image):
    """Compute the 867-D descriptor of an RGB image."""
    hsv = rgb_to_hsv(check_image(image))
    height, width = hsv.shape[:2]
    nh, ns, nv = HIST_BINS

    hi = _bin_index(hsv[..., 0], nh)
    si = _bin_index(hsv[..., 1], ns)
    vi = _bin_index(hsv[..., 2], nv)
    flat = (hi * ns * nv + si * nv + vi).ravel()
    hist = np.bincount(flat, minlength=HIST_DIM).astype(np.float64)
    hist /= flat.size

    s = hsv[..., 1]
    v = hsv[..., 2]
    rows = _cell_edges(height)
    cols = _cell_edges(width)
    cell_s = np.empty((GRID, GRID))
    cell_v = np.empty((GRID, GRID))
    cell_c = np.empty((GRID, GRID))
    for r in range(GRID):
        r0, r1 = rows[r], rows[r + 1]
        for c in range(GRID):
            c0, c1 = cols[c], cols[c + 1]
            vb = v[r0:r1, c0:c1]
            cell_s[r, c] = s[r0:r1, c0:c1].mean()
            cell_v[r, c] = vb.mean()
            cell_c[r, c] = vb.std()

    out = np.empty(FEATURE_DIM)
    out[:HIST_DIM] = hist
    out[SAT_SLICE] = cell_s.ravel()
    out[VAL_SLICE] = cell_v.ravel()
    out[CON_SLICE] = cell_c.ravel()
    out[PARAM_SLICE] = _params_from_hsv(hsv)
    return out


@dataclass(frozen=True)
class StandardizationStats:
    mean: np.ndarray
    scale: np.ndarray


def fit_standardization(features):
    """Per-dimension mean and population std; zero-variance dims get scale 1."""
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if F.size == 0 or F.shape[0] == 0:
        raise ValueError("empty feature set")
    mean = F.mean(axis=0)
    scale = F.std(axis=0)
    # float noise on constant columns counts as zero variance
    scale[scale < 1e-12] = 1.0
    return StandardizationStats(mean=mean, scale=scale)


def apply_standardization(stats, features):
    return (np.asarray(features, dtype=np.float64) - stats.mean) / stats.scale
