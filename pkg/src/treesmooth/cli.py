"""Command-line interface: explore, inspect-tree, and validate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, explore, ndt, selfcheck, tree
from .dataset import generate_gaussian_pair, load_csv
from .errors import ConfigError, DataError, NumericError
from .network import TrainConfig
from .seeding import make_rng
from .tree import select_depth_cv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

DEPTH_CV_GRID = tuple(range(1, 11))
DEPTH_CV_FOLDS = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesmooth",
        description="Measure how much a decision tree's rigid boundaries "
                    "must be smoothed before accuracy improves.")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("explore",
                        help="run the smoothing sweep and write artifacts")
    ex.add_argument("--data", required=True,
                    help="CSV path, or 'synthetic' for the built-in "
                         "Gaussian pair")
    ex.add_argument("--target", default=None,
                    help="target column name or index (CSV data)")
    ex.add_argument("--categoricals", choices=("drop", "onehot"),
                    default="drop")
    ex.add_argument("--depth", default="auto",
                    help="seed-tree depth, or 'auto' for CV selection")
    ex.add_argument("--gammas", default=None,
                    help="comma-separated smoothness values "
                         "(default: the built-in 36-value grid)")
    ex.add_argument("--reps", type=int, default=30)
    ex.add_argument("--seed", type=int, required=True,
                    help="master seed; all randomness derives from it")
    ex.add_argument("--epochs", type=int, default=100)
    ex.add_argument("--batch", type=int, default=32)
    ex.add_argument("--patience", type=int, default=10)
    ex.add_argument("--nn-baseline", action="store_true",
                    help="also grid-search the fully-connected baseline")
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--out", default="results")
    ex.add_argument("--synthetic-n", type=int, default=1000)
    ex.add_argument("--synthetic-d", type=int, default=3)
    ex.add_argument("--synthetic-separation", type=float, default=2.0)

    it = sub.add_parser("inspect-tree",
                        help="fit one seed tree and print its JSON")
    it.add_argument("--data", required=True)
    it.add_argument("--target", default=None)
    it.add_argument("--categoricals", choices=("drop", "onehot"),
                    default="drop")
    it.add_argument("--depth", type=int, required=True)
    it.add_argument("--seed", type=int, required=True)
    it.add_argument("--synthetic-n", type=int, default=1000)
    it.add_argument("--synthetic-d", type=int, default=3)
    it.add_argument("--synthetic-separation", type=float, default=2.0)

    va = sub.add_parser("validate",
                        help="run the built-in invariant suite")
    va.add_argument("--seed", type=int, default=0)
    va.add_argument("--model", default=None,
                    help="saved network JSON to check against --tree")
    va.add_argument("--tree", default=None,
                    help="saved tree JSON paired with --model")
    return parser


def _load_dataset(args):
    if args.data == "synthetic":
        dataset = generate_gaussian_pair(args.synthetic_n, args.synthetic_d,
                                         args.synthetic_separation,
                                         make_rng(args.seed, "synthetic"))
        source = {"source": "synthetic", "n": args.synthetic_n,
                  "d": args.synthetic_d,
                  "separation": args.synthetic_separation}
    else:
        if args.target is None:
            raise ConfigError("--target is required for CSV data")
        dataset = load_csv(args.data, args.target, args.categoricals)
        source = {"source": str(args.data), "target": args.target,
                  "categoricals": args.categoricals}
    return dataset, source


def _parse_gammas(text):
    if text is None:
        return None
    try:
        values = sorted({float(v) for v in text.split(",") if v.strip()},
                        reverse=True)
    except ValueError as exc:
        raise ConfigError(f"cannot parse --gammas: {exc}") from exc
    if not values:
        raise ConfigError("--gammas must list at least one value")
    return values


def cmd_explore(args) -> int:
    dataset, source = _load_dataset(args)
    grid = _parse_gammas(args.gammas)
    if args.depth == "auto":
        depth = select_depth_cv(dataset, DEPTH_CV_GRID, DEPTH_CV_FOLDS,
                                make_rng(args.seed, "depthcv"))
        depth_config = {"mode": "auto", "selected": depth,
                        "cv_grid": list(DEPTH_CV_GRID),
                        "cv_folds": DEPTH_CV_FOLDS}
    else:
        try:
            depth = int(args.depth)
        except ValueError:
            raise ConfigError("--depth must be an integer or 'auto'") from None
        depth_config = {"mode": "fixed", "selected": depth}
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch,
                      patience=args.patience)
    extra = {"data": source, "depth_selection": depth_config,
             "out": str(args.out), "package_version": __version__}

    def progress(i):
        print(f"[explore] repetition {i + 1}/{args.reps} done",
              file=sys.stderr)

    result = explore.run_exploration(
        dataset, depth, grid, n_reps=args.reps, cfg=cfg,
        master_seed=args.seed, workers=args.workers,
        run_nn_baseline=args.nn_baseline, extra_config=extra,
        on_repetition=progress)
    paths = explore.write_artifacts(result, Path(args.out))
    print(f"diagnosis: {result.diagnosis}")
    print(f"gamma_star: {result.gamma_star:g}  delta: {result.delta:+.4f}  "
          f"kappa_star: {result.kappa_star:.4f}")
    print(f"artifacts written to {paths['result'].parent}")
    return EXIT_OK


def cmd_inspect_tree(args) -> int:
    dataset, _ = _load_dataset(args)
    fitted = tree.fit_tree(dataset.features, dataset.labels,
                           dataset.class_count, args.depth)
    print(json.dumps(tree.tree_to_json(fitted), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_validate(args) -> int:
    if (args.model is None) != (args.tree is None):
        raise ConfigError("--model and --tree must be given together")
    ok = selfcheck.run_all(args.seed)
    if args.model is not None:
        model = ndt.load_model(args.model)
        try:
            doc = json.loads(Path(args.tree).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot load tree from {args.tree}: {exc}") from exc
        seed_tree = tree.tree_from_json(doc)
        rng = make_rng(args.seed, "selfcheck", "saved-model")
        scale = 1.0 + max(abs(n.threshold) for n in seed_tree.nodes
                          if not n.is_leaf)
        probes = rng.uniform(-scale, scale, size=(500, seed_tree.n_features))
        agreement, kept = selfcheck.crisp_agreement(seed_tree, model, probes)
        passed = agreement >= 0.999
        print(f"{'PASS' if passed else 'FAIL'}  saved model matches its seed "
              f"tree  (agreement {agreement:.4f} on {kept} probes)")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"explore": cmd_explore, "inspect-tree": cmd_inspect_tree,
                "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
