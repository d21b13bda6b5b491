"""On-disk outputs of an enhancement run."""
import json
import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .manifest import atomic_write_bytes, to_uint8, write_png

__all__ = ["contact_sheet", "write_enhance_outputs", "result_listing"]

THUMB = 96
CAPTION = 14


def contact_sheet(images, captions, columns=8, thumb=THUMB):
    """Tile images into one RGB picture with a caption under each tile."""
    n = len(images)
    cols = max(1, min(columns, n))
    rows = math.ceil(n / cols)
    sheet = Image.new("RGB", (cols * thumb, rows * (thumb + CAPTION)), "white")
    draw = ImageDraw.Draw(sheet)
    for k, (img, text) in enumerate(zip(images, captions)):
        r, c = divmod(k, cols)
        tile = Image.fromarray(to_uint8(img), mode="RGB")
        tile.thumbnail((thumb, thumb))
        x, y = c * thumb, r * (thumb + CAPTION)
        sheet.paste(tile, (x + (thumb - tile.width) // 2, y + (thumb - tile.height) // 2))
        draw.text((x + 2, y + thumb + 1), text, fill="black")
    return np.asarray(sheet, dtype=np.float64) / 255.0


def result_listing(result, names):
    def pv(v):
        return {"saturation": float(v[0]), "brightness": float(v[1]), "contrast": float(v[2])}
    return {
        "original_params": pv(result.original_params),
        "predicted_mean": pv(result.predicted_mean),
        "predicted_sd": pv(result.predicted_sd),
        "candidates": [{"rank": k + 1, "file": name, "quality": c.quality,
                        "target_params": pv(c.params), "measured_params": pv(c.measured),
                        "clipped": bool(c.clipped)}
                       for k, (c, name) in enumerate(zip(result.candidates, names))],
        "failures": [{"target_params": pv(t), "reason": msg} for t, msg in result.failures],
    }


def write_enhance_outputs(result, out_dir):
    """rank_001.png ... in quality order, contact_sheet.png and results.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for k, cand in enumerate(result.candidates, start=1):
        name = f"rank_{k:03d}.png"
        write_png(out_dir / name, cand.image)
        names.append(name)
    captions = [f"#{k} q={c.quality:.4g}" for k, c in enumerate(result.candidates, start=1)]
    write_png(out_dir / "contact_sheet.png",
              contact_sheet([c.image for c in result.candidates], captions))
    listing = result_listing(result, names)
    atomic_write_bytes(out_dir / "results.json",
                       (json.dumps(listing, indent=2) + "\n").encode("utf-8"))
    return listing
