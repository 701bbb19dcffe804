"""Acceptance gate: one test per shipping criterion, each printing a
PASS line with its measured values (visible with ``pytest -s`` or in the
captured output).  Tolerances and runtime budgets are pinned here.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from helpers import (decimal_root, far_from_thresholds, kappa_contingency,
                     max_rel_gradient_error, random_ndt_model, rule_dataset,
                     uniform_probes, wilcoxon_enumerate, xor_dataset)
from treesmooth import ndt, tree
from treesmooth.dataset import generate_gaussian_pair
from treesmooth.explore import (Diagnosis, default_gamma_grid,
                                nn_baseline_cv, run_exploration)
from treesmooth.metrics import cohens_kappa, wilcoxon_signed_rank
from treesmooth.network import TrainConfig
from treesmooth.seeding import make_rng


def report(line):
    print(f"\nACCEPTANCE {line}", flush=True)


def test_criterion_1_crisp_equivalence():
    """Compiled networks at gamma 100 reproduce their seed trees on
    >= 99.9% of 1000 off-boundary probes, for trees fit on varied data."""
    start = time.perf_counter()
    gamma = 100.0
    margin = 10.0 / gamma
    fixtures = [
        (generate_gaussian_pair(1000, 3, 2.0, make_rng(0, "fix")), 4),
        (generate_gaussian_pair(400, 2, 4.0, make_rng(1, "fix")), 5),
        (rule_dataset(500, 0.02, seed=2), 5),
        (xor_dataset(240, seed=3), 3),
    ]
    worst = 1.0
    for index, (data, depth) in enumerate(fixtures):
        fitted = tree.fit_tree(data.features, data.labels,
                               data.class_count, depth)
        model = ndt.compile_from_tree(fitted, gamma, gamma)
        probes = uniform_probes(data, 1000, make_rng(index, "probe"))
        keep = far_from_thresholds(fitted, probes, margin)
        agreement = float(np.mean(ndt.predict(model, probes[keep])
                                  == tree.predict(fitted, probes[keep])))
        worst = min(worst, agreement)
        assert agreement >= 0.999, f"fixture {index}: agreement {agreement}"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report(f"1 PASS crisp equivalence: worst agreement {worst:.4f} "
           f"across {len(fixtures)} fixtures in {elapsed:.1f}s")


def test_criterion_2_gradient_correctness():
    """Analytic gradients of all six blocks match central finite
    differences (step 1e-5) with max relative error < 1e-4 on 20 random
    small models."""
    start = time.perf_counter()
    rng = make_rng(2024, "gradgate")
    worst = 0.0
    for _ in range(20):
        model, d, classes = random_ndt_model(rng)
        X = 1.5 * rng.standard_normal((8, d))
        y = rng.integers(0, classes, size=8)
        worst = max(worst, max_rel_gradient_error(model, X, y, step=1e-5))
    elapsed = time.perf_counter() - start
    assert worst < 1e-4
    assert elapsed < 60.0
    report(f"2 PASS gradients: max relative error {worst:.2e} over 20 "
           f"models in {elapsed:.1f}s")


def test_criterion_3_metric_oracles():
    """Kappa matches a contingency-table oracle on 100 fixtures; exact
    signed-rank p-values match full 2^m enumeration on 50 fixtures."""
    rng = make_rng(3, "metricgate")
    worst_kappa = 0.0
    for _ in range(100):
        classes = int(rng.integers(2, 6))
        n = int(rng.integers(1, 60))
        a = rng.integers(0, classes, size=n)
        b = rng.integers(0, classes, size=n)
        worst_kappa = max(worst_kappa, abs(
            cohens_kappa(a, b, classes) - kappa_contingency(a, b, classes)))
    assert worst_kappa <= 1e-13

    worst_p = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 13))
        diffs = rng.integers(-3, 4, size=m).astype(float)
        if not (diffs != 0).any():
            diffs[int(rng.integers(0, m))] = 1.0
        base = rng.normal(size=m)
        mine = wilcoxon_signed_rank(base + diffs, base)
        _, expected = wilcoxon_enumerate(base + diffs, base)
        assert mine.method == "exact"
        worst_p = max(worst_p, abs(mine.p_value - expected))
    assert worst_p <= 1e-15
    report(f"3 PASS metric oracles: kappa dev {worst_kappa:.1e}, "
           f"exact-p dev {worst_p:.1e}")


def test_criterion_4_gamma_link_and_grid():
    """gamma2_of reproduces gamma1**(1/1.1) to >= 6 significant digits
    against a 50-digit oracle; the default grid has exactly 36 strictly
    decreasing values from 9000 to 1."""
    grid = default_gamma_grid()
    assert len(grid) == 36
    assert grid[0] == 9000.0 and grid[-1] == 1.0
    assert all(b < a for a, b in zip(grid, grid[1:]))
    worst = 0.0
    for gamma in grid:
        expected = decimal_root(gamma)
        worst = max(worst, abs(ndt.gamma2_of(gamma) - expected) / expected)
    assert worst < 5e-7
    report(f"4 PASS gamma link: 36-value grid, max relative error {worst:.1e}")


def test_criterion_5_synthetic_trend_reproduction():
    """On the built-in Gaussian pair (n=1000, d=3, separation=2, depth 4,
    10 repetitions, restricted grid) the smoothed network beats the seed
    trees by >= 0.03 mean accuracy at a gamma_star <= 10, and the paired
    signed-rank test rejects H0 at alpha = 0.05."""
    start = time.perf_counter()
    data = generate_gaussian_pair(1000, 3, 2.0, make_rng(20260808, "accept5"))
    grid = (9000.0, 1000.0, 100.0, 10.0, 5.0, 3.0, 1.0)
    result = run_exploration(data, depth=4, grid=grid, n_reps=10,
                             cfg=TrainConfig(), master_seed=20260808)
    elapsed = time.perf_counter() - start
    entry = result.significance[0]
    assert result.delta >= 0.03, f"delta {result.delta:.4f}"
    assert result.gamma_star <= 10.0, f"gamma_star {result.gamma_star}"
    assert entry.reject_h0 and entry.p_value < 0.05
    assert elapsed < 900.0
    report(f"5 PASS synthetic trend: delta {result.delta:+.4f}, "
           f"gamma_star {result.gamma_star:g}, p {entry.p_value:.2e}, "
           f"{elapsed:.0f}s")


def test_criterion_6_rigid_dataset_diagnosis():
    """On rule-generated labels (3 axis thresholds + 2% noise) the sweep
    finds no meaningful gain (delta <= 0.01) and diagnoses
    RigidSufficient with 5 repetitions."""
    start = time.perf_counter()
    data = rule_dataset(600, 0.02, seed=11)
    grid = (9000.0, 3000.0, 1000.0, 2.0, 1.0)
    result = run_exploration(data, depth=4, grid=grid, n_reps=5,
                             cfg=TrainConfig(), master_seed=11)
    elapsed = time.perf_counter() - start
    assert result.delta <= 0.01, f"delta {result.delta:.4f}"
    assert result.diagnosis == Diagnosis.RIGID_SUFFICIENT.value
    assert elapsed < 600.0
    report(f"6 PASS rigid dataset: delta {result.delta:+.4f}, "
           f"diagnosis {result.diagnosis}, {elapsed:.0f}s")


def test_criterion_7_cli_determinism(tmp_path):
    """Two CLI runs with identical config and seed produce byte-identical
    JSON and CSV artifacts."""
    out = tmp_path / "run"
    args = [sys.executable, "-m", "treesmooth", "explore",
            "--data", "synthetic", "--synthetic-n", "120",
            "--synthetic-d", "2", "--synthetic-separation", "3",
            "--depth", "2", "--gammas", "9000,10,1", "--reps", "2",
            "--seed", "7", "--epochs", "10", "--out", str(out)]
    env = {**os.environ,
           "PYTHONPATH": str(Path(__file__).resolve().parent.parent / "src")}
    names = ("result.json", "accuracy_vs_gamma.csv", "kappa_vs_gamma.csv",
             "report.txt")
    first = subprocess.run(args, env=env, capture_output=True, text=True)
    assert first.returncode == 0, first.stderr
    snapshot = {name: (out / name).read_bytes() for name in names}
    second = subprocess.run(args, env=env, capture_output=True, text=True)
    assert second.returncode == 0, second.stderr
    for name in names:
        assert (out / name).read_bytes() == snapshot[name], name
    report("7 PASS determinism: byte-identical artifacts across two CLI runs")


def test_criterion_8_nn_baseline_grid():
    """The baseline search enumerates exactly 36 architectures and
    reaches mean accuracy >= 0.95 on a separable toy fixture."""
    data = generate_gaussian_pair(160, 2, 6.0, make_rng(8, "nn"))
    result = nn_baseline_cv(data, TrainConfig(), master_seed=8,
                            rep_indices=[0, 1])
    assert result.configurations == 36
    assert result.mean_test_accuracy >= 0.95
    report(f"8 PASS nn baseline: 36 configurations, mean accuracy "
           f"{result.mean_test_accuracy:.3f}")
