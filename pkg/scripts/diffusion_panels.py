#!/usr/bin/env python3
"""Render the two forward-noising ladders as PGM panel sets.

Uniform blends sweep alpha 0.2 -> 0.9; power masks sharpen through shapes
0.8 -> 0.01 at blend 0.75. Works on any 8-bit PGM; without --input it
noises the built-in synthetic portrait.

Usage: python scripts/diffusion_panels.py [--input face.pgm] [--seed 5]
"""

import argparse
import sys
from pathlib import Path

from regulab.cli import dispatch


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", default=None)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--outdir", type=Path, default=Path("out/diffusion"))
    args = ap.parse_args()

    for mode in ("uniform", "power"):
        job = ["diffuse", "--mode", mode, "--seed", str(args.seed),
               "--output", str(args.outdir / f"{mode}.pgm")]
        if args.input:
            job += ["--input", args.input]
        code = dispatch(job)
        if code != 0:
            return code
        print(f"wrote {args.outdir}/{mode}_[0-4].pgm")
    return 0


if __name__ == "__main__":
    sys.exit(main())
