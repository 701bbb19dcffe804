"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately re-derive quantities through a different
route than the package (contingency tables, full sign enumeration,
central finite differences, high-precision Decimal arithmetic) so the
tests stay two-sided.
"""

from __future__ import annotations

import itertools
from decimal import Decimal, getcontext

import numpy as np

from treesmooth import ndt
from treesmooth.dataset import Dataset
from treesmooth.seeding import make_rng


def rule_dataset(n=600, noise_rate=0.02, seed=11, extra_features=0) -> Dataset:
    """Labels from three axis-aligned threshold rules plus label noise."""
    rng = make_rng(seed, "rules")
    d = 3 + extra_features
    X = rng.uniform(0.0, 1.0, size=(n, d))
    labels = ((X[:, 0] <= 0.35)
              | ((X[:, 1] > 0.65) & (X[:, 2] <= 0.5))).astype(int)
    flips = rng.random(n) < noise_rate
    labels = np.where(flips, 1 - labels, labels)
    return Dataset(X, labels, tuple(f"x{j}" for j in range(d)), 2)


def xor_dataset(n=200, seed=5) -> Dataset:
    """Four tight clusters in XOR arrangement; depth 1 cannot separate."""
    rng = make_rng(seed, "xor")
    per = n // 4
    centers = [(-1, -1, 0), (1, 1, 0), (-1, 1, 1), (1, -1, 1)]
    points, labels = [], []
    for cx, cy, label in centers:
        points.append(np.column_stack([rng.normal(cx, 0.15, per),
                                       rng.normal(cy, 0.15, per)]))
        labels.extend([label] * per)
    return Dataset(np.vstack(points), np.array(labels), ("x0", "x1"), 2)


def write_csv(path, lines) -> str:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def kappa_contingency(a, b, class_count) -> float:
    """Cohen's kappa via an explicitly built contingency table."""
    table = np.zeros((class_count, class_count), dtype=np.int64)
    for u, v in zip(a, b):
        table[int(u), int(v)] += 1
    n = int(table.sum())
    p_observed = float(np.trace(table)) / n
    p_expected = sum(float(table[c, :].sum()) * float(table[:, c].sum())
                     for c in range(class_count)) / (n * n)
    if p_expected >= 1.0:
        return 1.0
    return (p_observed - p_expected) / (1.0 - p_expected)


def _avg_ranks(magnitudes) -> np.ndarray:
    """Average ranks (1-based) computed by pairwise counting."""
    magnitudes = np.asarray(magnitudes, dtype=np.float64)
    ranks = np.empty(magnitudes.size)
    for i, value in enumerate(magnitudes):
        below = np.sum(magnitudes < value)
        equal = np.sum(magnitudes == value)
        ranks[i] = below + (equal + 1) / 2.0
    return ranks


def wilcoxon_enumerate(xs, ys):
    """Exact two-sided p by brute force over every sign assignment.

    Returns (statistic, p) where statistic = min(positive rank sum,
    negative rank sum); the p-value is the fraction of the 2^m sign
    vectors whose statistic is at most the observed one.
    """
    diffs = np.asarray(xs, dtype=np.float64) - np.asarray(ys, dtype=np.float64)
    diffs = diffs[diffs != 0.0]
    ranks = _avg_ranks(np.abs(diffs))
    total = ranks.sum()
    w_pos = ranks[diffs > 0].sum()
    observed = min(w_pos, total - w_pos)
    hits = 0
    m = diffs.size
    for signs in itertools.product((True, False), repeat=m):
        plus = sum(r for r, s in zip(ranks, signs) if s)
        if min(plus, total - plus) <= observed + 1e-12:
            hits += 1
    return observed, hits / 2 ** m


def finite_diff_gradients(model, X, y, step=1e-5) -> dict:
    """Central-difference gradients of the mean cross-entropy."""
    out = {}
    for name in ndt.PARAM_NAMES:
        param = getattr(model, name)
        grad = np.zeros_like(param)
        flat = param.reshape(-1)
        for k in range(flat.size):
            keep = flat[k]
            flat[k] = keep + step
            up, _ = ndt.loss_and_gradients(model, X, y)
            flat[k] = keep - step
            down, _ = ndt.loss_and_gradients(model, X, y)
            flat[k] = keep
            grad.reshape(-1)[k] = (up - down) / (2 * step)
        out[name] = grad
    return out


def max_rel_gradient_error(model, X, y, step=1e-5) -> float:
    _, analytic = ndt.loss_and_gradients(model, X, y)
    numeric = finite_diff_gradients(model, X, y, step)
    worst = 0.0
    for name in ndt.PARAM_NAMES:
        a, f = analytic[name], numeric[name]
        rel = np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-6)
        worst = max(worst, float(rel.max()))
    return worst


def random_ndt_model(rng) -> tuple:
    """Random tree-shaped network away from initialization."""
    d = int(rng.integers(2, 6))
    leaves = int(rng.integers(2, 7))
    classes = int(rng.integers(2, 5))
    gamma1 = float(rng.uniform(0.8, 4.0))
    model = ndt.NdtModel.from_arrays(
        0.7 * rng.standard_normal((leaves - 1, d)),
        0.7 * rng.standard_normal(leaves - 1),
        0.7 * rng.standard_normal((leaves, leaves - 1)),
        0.7 * rng.standard_normal(leaves),
        0.7 * rng.standard_normal((classes, leaves)),
        0.7 * rng.standard_normal(classes),
        gamma1, ndt.gamma2_of(gamma1))
    return model, d, classes


def decimal_root(value: float, exponent: str = "1.1") -> float:
    """High-precision value ** (1/exponent) via 50-digit Decimal ln/exp."""
    getcontext().prec = 50
    return float((Decimal(repr(value)).ln() / Decimal(exponent)).exp())


def far_from_thresholds(seed_tree, probes, margin) -> np.ndarray:
    """Mask of probes farther than ``margin`` from every split threshold."""
    keep = np.ones(len(probes), dtype=bool)
    for node in seed_tree.nodes:
        if not node.is_leaf:
            keep &= np.abs(probes[:, node.feature] - node.threshold) > margin
    return keep


def uniform_probes(dataset, count, rng) -> np.ndarray:
    low = dataset.features.min(axis=0)
    high = dataset.features.max(axis=0)
    pad = 0.25 * (high - low) + 1e-6
    return rng.uniform(low - pad, high + pad, size=(count, dataset.n_features))
