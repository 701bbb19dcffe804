#!/usr/bin/env python3
"""Smoothing sweep on rule-generated labels: the rigid counter-example.

Labels follow three axis-aligned threshold rules plus 2% flip noise, so a
seed tree already captures the structure and relaxing its boundaries
should not help (RigidSufficient).  The dataset is written next to the
artifacts so the run can be repeated from the CSV.

    python scripts/run_rule_benchmark.py --seed 11 --out results/rules
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from treesmooth.cli import main as cli_main  # noqa: E402
from treesmooth.dataset import Dataset, save_csv  # noqa: E402
from treesmooth.seeding import make_rng  # noqa: E402


def rule_dataset(n, noise_rate, seed) -> Dataset:
    rng = make_rng(seed, "rules")
    X = rng.uniform(0.0, 1.0, size=(n, 3))
    labels = ((X[:, 0] <= 0.35)
              | ((X[:, 1] > 0.65) & (X[:, 2] <= 0.5))).astype(int)
    flips = rng.random(n) < noise_rate
    labels = np.where(flips, 1 - labels, labels)
    return Dataset(X, labels, ("x0", "x1", "x2"), 2)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--n", type=int, default=600)
    parser.add_argument("--noise", type=float, default=0.02)
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="results/rules")
    args = parser.parse_args()

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "rule_dataset.csv"
    save_csv(rule_dataset(args.n, args.noise, args.seed), csv_path)

    return cli_main(["explore", "--data", str(csv_path), "--target", "target",
                     "--depth", "4", "--gammas", "9000,3000,1000,2,1",
                     "--reps", str(args.reps), "--seed", str(args.seed),
                     "--workers", str(args.workers), "--out", str(outdir)])


if __name__ == "__main__":
    sys.exit(main())
