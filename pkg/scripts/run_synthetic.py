#!/usr/bin/env python3
"""Full smoothing sweep on the built-in two-Gaussian dataset.

Reproduces the canonical study: depth-4 seed trees on 1000 instances with
3 features and mean separation 2, full 36-value gamma grid, 30
repetitions.  Expect the accuracy curve to climb as gamma falls while the
agreement curve declines, i.e. a RelaxationBeneficial diagnosis.

    python scripts/run_synthetic.py --seed 7 --out results/synthetic
    python scripts/run_synthetic.py --seed 7 --reps 10 --quick
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from treesmooth.cli import main as cli_main  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--reps", type=int, default=30)
    parser.add_argument("--depth", default="4")
    parser.add_argument("--separation", type=float, default=2.0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="results/synthetic")
    parser.add_argument("--nn-baseline", action="store_true")
    parser.add_argument("--quick", action="store_true",
                        help="restrict the grid to 7 values spanning all decades")
    args = parser.parse_args()

    cli_args = ["explore", "--data", "synthetic",
                "--synthetic-n", "1000", "--synthetic-d", "3",
                "--synthetic-separation", str(args.separation),
                "--depth", str(args.depth), "--reps", str(args.reps),
                "--seed", str(args.seed), "--workers", str(args.workers),
                "--out", args.out]
    if args.quick:
        cli_args += ["--gammas", "9000,1000,100,10,5,3,1"]
    if args.nn_baseline:
        cli_args += ["--nn-baseline"]
    return cli_main(cli_args)


if __name__ == "__main__":
    sys.exit(main())
