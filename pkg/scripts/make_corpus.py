"""Write a seeded synthetic layer corpus as 8-bit grayscale PNGs.

    python3 scripts/make_corpus.py --out corpus --layers 12 --size 2048 --seed 7
"""

import argparse
from pathlib import Path

from layout_codec.image import SHIFT3, store_png_gray
from layout_codec.synth import synth_corpus


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="corpus")
    p.add_argument("--layers", type=int, default=12)
    p.add_argument("--size", type=int, default=2048)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, img in synth_corpus(args.layers, args.size, seed=args.seed):
        (out / f"{name}.png").write_bytes(store_png_gray(img, SHIFT3))
        print(out / f"{name}.png")


if __name__ == "__main__":
    main()
