#!/usr/bin/env python3
"""Regenerate the full avalanche demo set into one output directory.

Produces the permuted power-law series, both comparator maps, the burst
series with its release events, rank-order plots' data, the detection
threshold curve, and the block-smoothed summary, all from one seed.

Usage: python scripts/avalanche_suite.py [--seed 7] [--outdir out/avalanche]
"""

import argparse
import sys
from pathlib import Path

from regulab.cli import dispatch


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--outdir", type=Path, default=Path("out/avalanche"))
    args = ap.parse_args()
    out = args.outdir
    seed = str(args.seed)

    jobs = [
        ["avalanche", "gen", "--n", "10000", "--e", "1.0", "--output", str(out / "series_e1.csv")],
        ["avalanche", "gen", "--n", "10000", "--e", "0.5", "--output", str(out / "series_e05.csv")],
        ["avalanche", "pfb", "--n", "10000", "--e", "1.0", "--output", str(out / "pfb.csv")],
        ["avalanche", "nfb", "--n", "10000", "--e", "1.0", "--output", str(out / "nfb.csv")],
        ["avalanche", "bursts", "--n", "1001", "--interval-min", "4", "--interval-max", "10",
         "--output", str(out / "bursts.csv")],
        ["avalanche", "rank", "--n", "10000", "--e", "1.0", "--output", str(out / "rank.csv")],
        ["avalanche", "threshold", "--n", "10000", "--e-model", "0.1",
         "--output", str(out / "threshold.csv")],
        ["avalanche", "smooth", "--n", "10000", "--e", "1.0", "--factor", "100",
         "--output", str(out / "smoothed.csv")],
    ]
    for job in jobs:
        code = dispatch([*job, "--seed", seed])
        if code != 0:
            print(f"failed: {' '.join(job)}", file=sys.stderr)
            return code
        print(f"wrote {job[-1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
