"""Enhance held-out images with a saved model.

For each image the model predicts target parameters, renders a grid of
candidates around them, and ranks the candidates.  The script prints
whether the top candidate moved the measured parameters closer to the
expert edit and writes one contact sheet per image.

Run 02_train_and_evaluate.py first with the same --out.

    python3 demos/03_enhance.py --out /tmp/gpe_demo --images 5
"""
import argparse
from pathlib import Path

import numpy as np

from gpenhance import TraversalConfig, enhance, load_manifest, load_model, read_png
from gpenhance.report import write_enhance_outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("demo_out"))
    ap.add_argument("--images", type=int, default=5)
    ap.add_argument("--count", type=int, default=16)
    args = ap.parse_args()

    model = load_model(args.out / "model.json")
    test = load_manifest(args.out / "test" / "manifest.json")
    closer = 0
    for e in test.entries[:args.images]:
        res = enhance(model, read_png(e.low.path), TraversalConfig(count=args.count))
        truth = np.array(e.high[0].params)
        before = np.linalg.norm(np.array(e.low.params) - truth)
        after = np.linalg.norm(np.array(res.best.measured) - truth)
        closer += after < before
        write_enhance_outputs(res, args.out / "enhanced" / e.id)
        print(f"{e.id}  predicted {np.round(res.predicted_mean, 3)}  top q={res.best.quality:.4f}  "
              f"distance to expert {before:.3f} -> {after:.3f}")
    print(f"\n{closer}/{min(args.images, len(test.entries))} moved closer to the expert edit")


if __name__ == "__main__":
    main()
