"""Generate a small synthetic training set and look at one triple.

Each synthetic photograph comes in three versions: the low-quality
original, p expert edits (high) and p degradations (poor).  This script
writes a dataset, prints the measured (saturation, brightness, contrast)
of every version of the first entry and saves a contact sheet of the
first few triples.

    python3 demos/01_synthetic_triples.py --out /tmp/gpe_demo
"""
import argparse
from pathlib import Path

from gpenhance import SyntheticDatasetConfig, gen_synthetic_dataset, read_png, write_png
from gpenhance.report import contact_sheet


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("demo_out"))
    ap.add_argument("--n", type=int, default=8)
    args = ap.parse_args()

    manifest, path = gen_synthetic_dataset(
        SyntheticDatasetConfig(n_images=args.n, image_size=64, p=2, seed=0), args.out / "train")
    print(f"wrote {len(manifest.entries)} entries to {path}")

    e = manifest.entries[0]
    print(f"\nentry {e.id}")
    print(f"  low   s={e.low.params[0]:.3f} v={e.low.params[1]:.3f} c={e.low.params[2]:.3f}")
    for tag, records in (("high", e.high), ("poor", e.poor)):
        for r in records:
            print(f"  {tag:<5} s={r.params[0]:.3f} v={r.params[1]:.3f} c={r.params[2]:.3f}")

    images, captions = [], []
    for e in manifest.entries[:4]:
        for tag, r in [("low", e.low), ("high", e.high[0]), ("poor", e.poor[0])]:
            images.append(read_png(r.path))
            captions.append(f"{e.id} {tag}")
    sheet = args.out / "triples.png"
    write_png(sheet, contact_sheet(images, captions, columns=3))
    print(f"\ncontact sheet: {sheet}")


if __name__ == "__main__":
    main()
