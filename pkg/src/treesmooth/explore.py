"""The smoothing sweep: repeated resampling, per-gamma training, and the
aggregate curves that say whether relaxing a tree's boundaries helps.

For every repetition a fresh stratified split seeds a tree; for every
gamma in the grid a network is compiled from that tree, trained, and
scored on the test part for accuracy and for decision agreement (Cohen's
kappa) against its seed tree.  Per-gamma means over repetitions give the
two curves, gamma_star maximizes mean accuracy, and a paired signed-rank
test checks whether the tree and the relaxed network differ
significantly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import ndt, tree
from .dataset import DEFAULT_FRACTIONS, Dataset, subsample_iteration
from .errors import ConfigError, DataError, DegeneratePairsError
from .metrics import accuracy, cohens_kappa, wilcoxon_signed_rank
from .network import TrainConfig, glorot_stack, predict_labels, train_network
from .seeding import child_seed, make_rng

DEFAULT_ALPHA = 0.05


def default_gamma_grid() -> tuple[float, ...]:
    """The built-in 36-value grid: four descending decades, 9000 down to 1."""
    grid = []
    for scale in (1000, 100, 10, 1):
        grid.extend(float(k * scale) for k in range(9, 0, -1))
    return tuple(grid)


def validate_gamma_grid(grid) -> tuple[float, ...]:
    values = tuple(float(g) for g in grid)
    if not values:
        raise ConfigError("gamma grid must be non-empty")
    if any(not (math.isfinite(g) and g > 0) for g in values):
        raise ConfigError("gamma values must be positive and finite")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ConfigError("gamma grid must be strictly decreasing")
    return values


class Diagnosis(str, Enum):
    RELAXATION_BENEFICIAL = "RelaxationBeneficial"
    RIGID_SUFFICIENT = "RigidSufficient"
    RIGID_BUT_SENSITIVE = "RigidButSensitive"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class InterpretConfig:
    """Thresholds that turn the curves into a verbal diagnosis.

    These operationalize a qualitative reading of the accuracy/agreement
    plots and are deliberately configuration, not constants.
    """

    delta_gain: float = 0.01        # minimum mean-accuracy gain that counts
    kappa_high: float = 0.8         # "still close to the tree" agreement level
    kappa_monotone_slack: float = 0.02  # tolerated upticks in a decreasing curve


@dataclass(frozen=True)
class RunRecord:
    """One (repetition, gamma) cell of the sweep."""

    repetition: int
    gamma: float
    dt_accuracy: float
    ndt_accuracy: float
    kappa: float
    stopped_epoch: int
    best_epoch: int
    train_seed: int


@dataclass(frozen=True)
class GammaSummary:
    gamma: float
    mean_accuracy: float
    std_accuracy: float
    mean_kappa: float
    std_kappa: float


@dataclass(frozen=True)
class SignificanceEntry:
    comparison: str
    n_pairs: int
    statistic: float | None
    p_value: float | None
    reject_h0: bool | None
    alpha: float
    method: str | None
    degenerate: bool = False


@dataclass(frozen=True)
class NnArchitecture:
    hidden_layers: int
    width: int
    activation: str


@dataclass(frozen=True)
class NnBaselineResult:
    architecture: NnArchitecture
    configurations: int
    mean_valid_accuracy: float
    mean_test_accuracy: float
    per_rep_test_accuracy: tuple[float, ...]


@dataclass(frozen=True)
class ExplorationResult:
    grid: tuple[float, ...]
    records: tuple[RunRecord, ...]
    summaries: tuple[GammaSummary, ...]
    dt_accuracies: tuple[float, ...]
    dt_accuracy_mean: float
    dt_accuracy_std: float
    gamma_star: float
    delta: float
    kappa_star: float
    diagnosis: str
    significance: tuple[SignificanceEntry, ...]
    usable_repetitions: tuple[int, ...]
    degenerate_repetitions: int
    config: dict
    nn_baseline: NnBaselineResult | None = None


def _repetition_worker(args):
    """Full per-repetition unit of work; parallel-safe and seed-derived."""
    dataset, depth, grid, cfg, master_seed, i, min_leaf = args
    split = subsample_iteration(dataset, i, master_seed)
    X_train, y_train = dataset.take(split.train_idx)
    X_valid, y_valid = dataset.take(split.valid_idx)
    X_test, y_test = dataset.take(split.test_idx)
    seed_tree = tree.fit_tree(X_train, y_train, dataset.class_count,
                              depth, min_leaf)
    if seed_tree.n_leaves < 2:
        return i, None
    dt_test_pred = tree.predict(seed_tree, X_test)
    dt_acc = accuracy(dt_test_pred, y_test)
    per_gamma = []
    for gamma in grid:
        model = ndt.compile_from_tree(seed_tree, gamma, ndt.gamma2_of(gamma))
        seed = child_seed(master_seed, "train", i, repr(float(gamma)))
        trained, history = ndt.train(model, (X_train, y_train),
                                     (X_valid, y_valid), cfg,
                                     np.random.default_rng(seed), seed=seed)
        ndt_pred = ndt.predict(trained, X_test)
        per_gamma.append((gamma, accuracy(ndt_pred, y_test),
                          cohens_kappa(ndt_pred, dt_test_pred,
                                       dataset.class_count),
                          history.stopped_epoch, history.best_epoch, seed))
    return i, {"dt_accuracy": dt_acc, "per_gamma": per_gamma}


def run_exploration(dataset: Dataset, depth: int, grid=None, n_reps: int = 30,
                    cfg: TrainConfig | None = None, master_seed: int = 0,
                    min_leaf: int = 1, workers: int = 1,
                    run_nn_baseline: bool = False,
                    interpretation: InterpretConfig | None = None,
                    alpha: float = DEFAULT_ALPHA,
                    extra_config: dict | None = None,
                    on_repetition=None) -> ExplorationResult:
    """Run the full sweep and aggregate it into an ExplorationResult.

    Deterministic given (dataset, master_seed, config); ``workers`` only
    widens the repetition-level parallelism without changing any output.
    Repetitions whose seed tree degenerates to a single leaf are skipped
    and counted.
    """
    grid = validate_gamma_grid(default_gamma_grid() if grid is None else grid)
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    if n_reps < 1:
        raise ConfigError("n_reps must be >= 1")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    cfg = cfg or TrainConfig()
    interpretation = interpretation or InterpretConfig()

    tasks = [(dataset, depth, grid, cfg, master_seed, i, min_leaf)
             for i in range(n_reps)]
    outcomes = []
    if workers == 1:
        for task in tasks:
            outcome = _repetition_worker(task)
            outcomes.append(outcome)
            if on_repetition is not None:
                on_repetition(outcome[0])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(_repetition_worker, tasks):
                outcomes.append(outcome)
                if on_repetition is not None:
                    on_repetition(outcome[0])

    usable = [(i, payload) for i, payload in outcomes if payload is not None]
    degenerate = n_reps - len(usable)
    if not usable:
        raise DataError("every repetition produced a single-leaf seed tree")

    records = []
    dt_accuracies = []
    for i, payload in usable:
        dt_accuracies.append(payload["dt_accuracy"])
        for gamma, ndt_acc, kappa, stopped, best, seed in payload["per_gamma"]:
            records.append(RunRecord(i, gamma, payload["dt_accuracy"],
                                     float(ndt_acc), float(kappa),
                                     stopped, best, seed))

    summaries = _summarize(grid, records)
    gamma_star = argmax_gamma(grid, [s.mean_accuracy for s in summaries])
    star = next(s for s in summaries if s.gamma == gamma_star)
    dt_mean = float(np.mean(dt_accuracies))
    delta = star.mean_accuracy - dt_mean
    diagnosis = _classify(summaries, gamma_star, delta, star.mean_kappa,
                          interpretation)

    config = {"depth": depth, "min_leaf": min_leaf, "n_repetitions": n_reps,
              "master_seed": master_seed, "gamma_grid": list(grid),
              "fractions": list(DEFAULT_FRACTIONS), "alpha": alpha,
              "train": asdict(cfg), "interpretation": asdict(interpretation),
              "nn_baseline": run_nn_baseline, "workers": workers}
    if extra_config:
        config.update(extra_config)

    nn_result = None
    if run_nn_baseline:
        nn_result = nn_baseline_cv(dataset, cfg, master_seed,
                                   rep_indices=[i for i, _ in usable])

    significance = _significance(records, gamma_star, dt_accuracies,
                                 nn_result, alpha)

    return ExplorationResult(
        grid=grid, records=tuple(records), summaries=summaries,
        dt_accuracies=tuple(float(a) for a in dt_accuracies),
        dt_accuracy_mean=dt_mean,
        dt_accuracy_std=float(np.std(dt_accuracies)),
        gamma_star=gamma_star, delta=float(delta),
        kappa_star=star.mean_kappa, diagnosis=diagnosis.value,
        significance=significance,
        usable_repetitions=tuple(i for i, _ in usable),
        degenerate_repetitions=degenerate, config=config,
        nn_baseline=nn_result)


def _summarize(grid, records) -> tuple[GammaSummary, ...]:
    summaries = []
    for gamma in grid:
        accs = [r.ndt_accuracy for r in records if r.gamma == gamma]
        kappas = [r.kappa for r in records if r.gamma == gamma]
        summaries.append(GammaSummary(gamma,
                                      float(np.mean(accs)), float(np.std(accs)),
                                      float(np.mean(kappas)), float(np.std(kappas))))
    return tuple(summaries)


def argmax_gamma(grid, mean_accuracies) -> float:
    """Gamma with the highest mean accuracy; ties go to the LARGEST gamma
    (the more rigid, more interpretable model wins equal performance)."""
    if len(grid) != len(mean_accuracies) or not grid:
        raise ConfigError("grid and means must align and be non-empty")
    best_gamma, best_mean = grid[0], mean_accuracies[0]
    for gamma, mean in zip(grid[1:], mean_accuracies[1:]):
        if mean > best_mean:  # strict: the grid descends, so ties keep larger
            best_gamma, best_mean = gamma, mean
    return float(best_gamma)


def select_gamma_star(result: ExplorationResult) -> float:
    """Recompute gamma_star from the aggregated curves."""
    return argmax_gamma(result.grid,
                        [s.mean_accuracy for s in result.summaries])


def _paired_entry(name, xs, ys, alpha) -> SignificanceEntry:
    try:
        outcome = wilcoxon_signed_rank(xs, ys)
    except DegeneratePairsError:
        return SignificanceEntry(name, len(xs), None, None, None, alpha,
                                 None, degenerate=True)
    return SignificanceEntry(name, len(xs), outcome.statistic,
                             outcome.p_value, outcome.p_value < alpha,
                             alpha, outcome.method)


def _significance(records, gamma_star, dt_accuracies, nn_result, alpha):
    star_records = sorted((r for r in records if r.gamma == gamma_star),
                          key=lambda r: r.repetition)
    ndt_accs = [r.ndt_accuracy for r in star_records]
    entries = [_paired_entry("ndt_vs_dt", ndt_accs, dt_accuracies, alpha)]
    if nn_result is not None:
        nn_accs = list(nn_result.per_rep_test_accuracy)
        entries.append(_paired_entry("ndt_vs_nn", ndt_accs, nn_accs, alpha))
        entries.append(_paired_entry("nn_vs_dt", nn_accs, dt_accuracies, alpha))
    return tuple(entries)


def significance_report(result: ExplorationResult,
                        alpha: float = DEFAULT_ALPHA) -> tuple[SignificanceEntry, ...]:
    """Paired two-sided signed-rank tests on per-repetition accuracies."""
    if len(result.usable_repetitions) < 2:
        raise DataError("significance needs at least 2 usable repetitions")
    return _significance(result.records, result.gamma_star,
                         list(result.dt_accuracies), result.nn_baseline, alpha)


def _decade(gamma: float) -> int:
    return int(math.floor(math.log10(gamma)))


def _classify(summaries, gamma_star, delta, kappa_star,
              cfg: InterpretConfig) -> Diagnosis:
    decades = [_decade(s.gamma) for s in summaries]
    star_decade = _decade(gamma_star)
    kappas = [s.mean_kappa for s in summaries]  # grid order: gamma descending
    kappa_decreasing = all(b <= a + cfg.kappa_monotone_slack
                           for a, b in zip(kappas, kappas[1:]))
    if (delta > cfg.delta_gain and star_decade == min(decades)
            and kappa_decreasing):
        return Diagnosis.RELAXATION_BENEFICIAL
    if delta <= cfg.delta_gain and star_decade == max(decades):
        return Diagnosis.RIGID_SUFFICIENT
    if delta > cfg.delta_gain and kappa_star >= cfg.kappa_high:
        return Diagnosis.RIGID_BUT_SENSITIVE
    return Diagnosis.INCONCLUSIVE


def interpret(result: ExplorationResult,
              cfg: InterpretConfig | None = None) -> Diagnosis:
    """Map the aggregated curves to one of the four diagnoses.

    * accuracy clearly improves, gamma_star sits in the grid's lowest
      decade, and agreement falls as gamma does: relaxation is beneficial
      (a smoother model family is worth exploring);
    * no meaningful gain and gamma_star in the highest decade: the rigid
      boundaries suffice;
    * a clear gain while agreement with the seed tree stays high: the data
      suits a tree, but its accuracy is sensitive to boundary placement;
    * anything else is inconclusive.
    """
    cfg = cfg or InterpretConfig()
    return _classify(result.summaries, result.gamma_star, result.delta,
                     result.kappa_star, cfg)


def nn_baseline_cv(dataset: Dataset, cfg: TrainConfig | None = None,
                   master_seed: int = 0, n_reps: int = 30,
                   rep_indices=None, hidden_depths=(1, 2, 3),
                   widths=(2, 3, 4, 5, 6, 7),
                   activations=("tanh", "relu")) -> NnBaselineResult:
    """Grid-search a small fully-connected baseline under the sweep protocol.

    Enumerates depth x width x activation architectures (36 with the
    defaults), trains each on the same repeated splits and TrainConfig as
    the tree networks, picks the architecture with the best mean
    validation accuracy (ties: first in enumeration order), and reports
    its mean test accuracy.
    """
    cfg = cfg or TrainConfig()
    reps = list(rep_indices) if rep_indices is not None else list(range(n_reps))
    if not reps:
        raise ConfigError("need at least one repetition")
    archs = [NnArchitecture(depth, width, act)
             for depth in hidden_depths for width in widths
             for act in activations]
    valid_acc = np.zeros((len(archs), len(reps)))
    test_acc = np.zeros((len(archs), len(reps)))
    for column, i in enumerate(reps):
        split = subsample_iteration(dataset, i, master_seed)
        X_train, y_train = dataset.take(split.train_idx)
        X_valid, y_valid = dataset.take(split.valid_idx)
        X_test, y_test = dataset.take(split.test_idx)
        for row, arch in enumerate(archs):
            rng = make_rng(master_seed, "nn", i, arch.hidden_layers,
                           arch.width, arch.activation)
            sizes = [dataset.n_features] + [arch.width] * arch.hidden_layers \
                + [dataset.class_count]
            layers = glorot_stack(sizes, arch.activation, rng)
            trained, _ = train_network(layers, (X_train, y_train),
                                       (X_valid, y_valid), cfg, rng)
            valid_acc[row, column] = accuracy(predict_labels(trained, X_valid),
                                              y_valid)
            test_acc[row, column] = accuracy(predict_labels(trained, X_test),
                                             y_test)
    mean_valid = valid_acc.mean(axis=1)
    best = int(np.argmax(mean_valid))
    return NnBaselineResult(archs[best], len(archs), float(mean_valid[best]),
                            float(test_acc[best].mean()),
                            tuple(float(a) for a in test_acc[best]))


# ---------------------------------------------------------------------------
# Artifact serialization
# ---------------------------------------------------------------------------

def result_to_dict(result: ExplorationResult) -> dict:
    doc = {"config": result.config,
           "grid": list(result.grid),
           "gamma_star": result.gamma_star,
           "delta": result.delta,
           "kappa_star": result.kappa_star,
           "diagnosis": result.diagnosis,
           "dt_accuracy": {"mean": result.dt_accuracy_mean,
                           "std": result.dt_accuracy_std,
                           "per_repetition": list(result.dt_accuracies)},
           "summaries": [asdict(s) for s in result.summaries],
           "records": [asdict(r) for r in result.records],
           "significance": [asdict(s) for s in result.significance],
           "usable_repetitions": list(result.usable_repetitions),
           "degenerate_repetitions": result.degenerate_repetitions,
           "nn_baseline": asdict(result.nn_baseline)
           if result.nn_baseline else None}
    return doc


def _config_comment(config: dict) -> str:
    return "# config=" + json.dumps(config, sort_keys=True,
                                    separators=(",", ":"))


def _format_report(result: ExplorationResult) -> str:
    lines = ["boundary-smoothing exploration report",
             "=====================================",
             f"diagnosis:                {result.diagnosis}",
             f"gamma_star:               {result.gamma_star:g}",
             f"mean DT accuracy:         {result.dt_accuracy_mean:.6f} "
             f"(std {result.dt_accuracy_std:.6f})",
             f"mean NDT accuracy (g*):   "
             f"{result.dt_accuracy_mean + result.delta:.6f}",
             f"delta (NDT* - DT):        {result.delta:+.6f}",
             f"mean agreement (g*):      {result.kappa_star:.6f}",
             f"repetitions:              "
             f"{result.config['n_repetitions']} requested, "
             f"{len(result.usable_repetitions)} usable, "
             f"{result.degenerate_repetitions} degenerate (single-leaf seeds)",
             "significance (two-sided signed-rank, "
             f"alpha={result.significance[0].alpha:g}):"]
    for entry in result.significance:
        if entry.degenerate:
            lines.append(f"  {entry.comparison:<12} degenerate: "
                         "all paired differences are zero")
        else:
            verdict = "yes" if entry.reject_h0 else "no"
            lines.append(f"  {entry.comparison:<12} W={entry.statistic:g}  "
                         f"p={entry.p_value:.3e}  reject H0: {verdict}")
    if result.nn_baseline:
        nn = result.nn_baseline
        lines.append(f"nn baseline:              "
                     f"{nn.architecture.hidden_layers} hidden layer(s), "
                     f"width {nn.architecture.width}, {nn.architecture.activation}; "
                     f"mean test accuracy {nn.mean_test_accuracy:.6f}")
    lines.append("resolved config:")
    lines.append(json.dumps(result.config, indent=2, sort_keys=True))
    return "\n".join(lines) + "\n"


def write_artifacts(result: ExplorationResult, outdir) -> dict[str, Path]:
    """Write result.json, the two curve CSVs, and report.txt.

    Every artifact embeds the resolved config (and hence the master seed).
    On any write failure the partially written files are removed.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"result": outdir / "result.json",
             "accuracy": outdir / "accuracy_vs_gamma.csv",
             "kappa": outdir / "kappa_vs_gamma.csv",
             "report": outdir / "report.txt"}
    comment = _config_comment(result.config)
    written: list[Path] = []
    try:
        payload = json.dumps(result_to_dict(result), indent=2,
                             sort_keys=True) + "\n"
        paths["result"].write_text(payload, encoding="utf-8")
        written.append(paths["result"])
        for key, columns in (("accuracy", ("mean_accuracy", "std_accuracy")),
                             ("kappa", ("mean_kappa", "std_kappa"))):
            rows = [comment, "gamma," + ",".join(columns)]
            for s in result.summaries:  # grid order: gamma descending
                rows.append(",".join([repr(s.gamma)]
                                     + [repr(getattr(s, c)) for c in columns]))
            paths[key].write_text("\n".join(rows) + "\n", encoding="utf-8")
            written.append(paths[key])
        paths["report"].write_text(_format_report(result), encoding="utf-8")
        written.append(paths["report"])
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return paths
