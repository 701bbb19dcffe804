"""Built-in invariant suite behind ``treesmooth validate``.

Each check generates its own fixtures from a seed and compares one
implementation path against an independent oracle: compiled networks
against crisp tree routing, analytic gradients against central finite
differences, the agreement and signed-rank statistics against brute-force
computations.
"""

from __future__ import annotations

import itertools
import time
from decimal import Decimal, getcontext

import numpy as np

from . import ndt, tree
from .dataset import generate_gaussian_pair
from .explore import default_gamma_grid
from .metrics import cohens_kappa, wilcoxon_signed_rank
from .seeding import make_rng

CRISP_GAMMA = 100.0
CRISP_MARGIN_SCALE = 10.0  # probes within 10/gamma of a threshold are excluded


def crisp_probe_mask(seed_tree, probes, gamma):
    """Rows farther than 10/gamma from every split threshold."""
    mask = np.ones(len(probes), dtype=bool)
    for node in seed_tree.nodes:
        if not node.is_leaf:
            mask &= np.abs(probes[:, node.feature] - node.threshold) \
                > CRISP_MARGIN_SCALE / gamma
    return mask


def crisp_agreement(seed_tree, model, probes):
    """Fraction of off-boundary probes where network and tree argmax agree."""
    keep = crisp_probe_mask(seed_tree, probes, model.gamma1)
    kept = probes[keep]
    if len(kept) == 0:
        return 1.0, 0
    return (float(np.mean(ndt.predict(model, kept)
                          == tree.predict(seed_tree, kept))), len(kept))


def sample_probes(dataset, count, rng):
    """Uniform probes over a box 50% wider than the data range."""
    low = dataset.features.min(axis=0)
    high = dataset.features.max(axis=0)
    pad = 0.25 * (high - low) + 1e-6
    return rng.uniform(low - pad, high + pad,
                       size=(count, dataset.n_features))


def check_grid():
    grid = default_gamma_grid()
    ok = (len(grid) == 36 and grid[0] == 9000.0 and grid[-1] == 1.0
          and all(b < a for a, b in zip(grid, grid[1:])))
    return ok, f"{len(grid)} values, {grid[0]:g}..{grid[-1]:g}"


def check_gamma_link():
    getcontext().prec = 50
    worst = 0.0
    for gamma in default_gamma_grid():
        expected = float((Decimal(repr(gamma)).ln() / Decimal("1.1")).exp())
        err = abs(ndt.gamma2_of(gamma) - expected) / expected
        worst = max(worst, err)
    return worst < 5e-7, f"max relative error {worst:.2e}"


def check_crisp_equivalence(seed=0, probes=500):
    rng = make_rng(seed, "selfcheck", "crisp")
    dataset = generate_gaussian_pair(300, 3, 2.5, rng)
    fitted = tree.fit_tree(dataset.features, dataset.labels, 2, 3)
    model = ndt.compile_from_tree(fitted, CRISP_GAMMA, CRISP_GAMMA)
    agreement, kept = crisp_agreement(fitted, model,
                                      sample_probes(dataset, probes, rng))
    return agreement >= 0.999, f"agreement {agreement:.4f} on {kept} probes"


def finite_difference_gradients(model, X, y, step=1e-5):
    """Central-difference gradients for the six parameter blocks."""
    grads = {}
    for name in ndt.PARAM_NAMES:
        param = getattr(model, name)
        grad = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = param[idx]
            param[idx] = original + step
            up, _ = ndt.loss_and_gradients(model, X, y)
            param[idx] = original - step
            down, _ = ndt.loss_and_gradients(model, X, y)
            param[idx] = original
            grad[idx] = (up - down) / (2.0 * step)
            it.iternext()
        grads[name] = grad
    return grads


def random_small_model(rng):
    d = int(rng.integers(2, 5))
    n_leaves = int(rng.integers(2, 6))
    classes = int(rng.integers(2, 4))
    gamma1 = float(rng.uniform(0.8, 4.0))
    gamma2 = ndt.gamma2_of(gamma1)
    scale = 0.7
    return ndt.NdtModel.from_arrays(
        scale * rng.standard_normal((n_leaves - 1, d)),
        scale * rng.standard_normal(n_leaves - 1),
        scale * rng.standard_normal((n_leaves, n_leaves - 1)),
        scale * rng.standard_normal(n_leaves),
        scale * rng.standard_normal((classes, n_leaves)),
        scale * rng.standard_normal(classes),
        gamma1, gamma2), d, classes


def max_gradient_error(model, X, y):
    _, analytic = ndt.loss_and_gradients(model, X, y)
    numeric = finite_difference_gradients(model, X, y)
    worst = 0.0
    for name in ndt.PARAM_NAMES:
        a, f = analytic[name], numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-6)
        worst = max(worst, float((np.abs(a - f) / denom).max()))
    return worst


def check_gradients(seed=0, models=3):
    rng = make_rng(seed, "selfcheck", "grad")
    worst = 0.0
    for _ in range(models):
        model, d, classes = random_small_model(rng)
        X = rng.standard_normal((6, d)) * 1.5
        y = rng.integers(0, classes, size=6)
        worst = max(worst, max_gradient_error(model, X, y))
    return worst < 1e-4, f"max relative error {worst:.2e}"


def kappa_contingency_oracle(a, b, class_count):
    table = np.zeros((class_count, class_count))
    for u, v in zip(a, b):
        table[u, v] += 1
    n = table.sum()
    p_observed = table.trace() / n
    p_expected = float(table.sum(axis=1) @ table.sum(axis=0)) / (n * n)
    if p_expected >= 1.0:
        return 1.0
    return (p_observed - p_expected) / (1.0 - p_expected)


def check_kappa(seed=0, fixtures=25):
    rng = make_rng(seed, "selfcheck", "kappa")
    worst = 0.0
    for _ in range(fixtures):
        classes = int(rng.integers(2, 5))
        n = int(rng.integers(1, 40))
        a = rng.integers(0, classes, size=n)
        b = rng.integers(0, classes, size=n)
        worst = max(worst, abs(cohens_kappa(a, b, classes)
                               - kappa_contingency_oracle(a, b, classes)))
    return worst < 1e-12, f"max |difference| {worst:.2e}"


def wilcoxon_enumeration_oracle(diffs):
    """Full 2^m sign enumeration of P(min rank sum <= observed)."""
    diffs = np.asarray(diffs, dtype=np.float64)
    diffs = diffs[diffs != 0.0]
    magnitudes = np.abs(diffs)
    order = np.argsort(magnitudes, kind="stable")
    ranks = np.empty(len(diffs))
    i = 0
    sorted_mag = magnitudes[order]
    while i < len(diffs):
        j = i
        while j < len(diffs) and sorted_mag[j] == sorted_mag[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j + 1)
        i = j
    w_pos = ranks[diffs > 0].sum()
    w_neg = ranks[diffs < 0].sum()
    observed = min(w_pos, w_neg)
    hits = 0
    for signs in itertools.product((1.0, -1.0), repeat=len(diffs)):
        signs = np.asarray(signs)
        plus = ranks[signs > 0].sum()
        if min(plus, ranks.sum() - plus) <= observed + 1e-12:
            hits += 1
    return hits / 2 ** len(diffs)


def check_wilcoxon(seed=0, fixtures=12):
    rng = make_rng(seed, "selfcheck", "wilcoxon")
    worst = 0.0
    for _ in range(fixtures):
        m = int(rng.integers(2, 11))
        diffs = rng.integers(-3, 4, size=m).astype(float)
        if not (diffs != 0).any():
            diffs[0] = 1.0
        outcome = wilcoxon_signed_rank(diffs, np.zeros(m))
        worst = max(worst, abs(outcome.p_value
                               - wilcoxon_enumeration_oracle(diffs)))
    return worst < 1e-12, f"max |p difference| {worst:.2e}"


def run_all(seed=0, report=print):
    """Run every check; returns True when all pass."""
    checks = [
        ("gamma grid shape", check_grid),
        ("gamma link vs high-precision oracle", check_gamma_link),
        ("crisp equivalence of compiled networks",
         lambda: check_crisp_equivalence(seed)),
        ("analytic gradients vs finite differences",
         lambda: check_gradients(seed)),
        ("kappa vs contingency oracle", lambda: check_kappa(seed)),
        ("exact signed-rank p vs enumeration", lambda: check_wilcoxon(seed)),
    ]
    all_ok = True
    for name, check in checks:
        start = time.perf_counter()
        ok, detail = check()
        elapsed = time.perf_counter() - start
        report(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail}, {elapsed:.2f}s)")
        all_ok = all_ok and ok
    return all_ok
