"""Performance, agreement, and paired-significance statistics.

All functions are pure and operate on 1-D arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DegeneratePairsError

# Paired tests with more usable pairs than this switch from exact sign
# enumeration to the tie-corrected normal approximation.
EXACT_ENUMERATION_LIMIT = 12


def accuracy(pred, truth) -> float:
    """Fraction of positions where two label vectors agree exactly."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.ndim != 1 or pred.shape != truth.shape:
        raise DataError("prediction and truth must be 1-D and equally long")
    if pred.size == 0:
        raise DataError("empty label vectors")
    return float(np.mean(pred == truth))


def cohens_kappa(a, b, class_count: int) -> float:
    """Chance-corrected agreement between two label vectors.

        kappa = (p_o - p_e) / (1 - p_e)

    where ``p_o`` is the observed agreement rate and ``p_e`` the agreement
    expected from the two vectors' marginal class rates.  1 means complete
    agreement, 0 chance-level agreement, negative values less agreement
    than chance.  When both vectors are the same constant (``p_e = 1``)
    the comparison is vacuous and 1.0 is returned by convention.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.ndim != 1 or a.shape != b.shape:
        raise DataError("label vectors must be 1-D and equally long")
    if a.size == 0:
        raise DataError("empty label vectors")
    if class_count < 2:
        raise ConfigError("class_count must be >= 2")
    for v in (a, b):
        if v.min() < 0 or v.max() >= class_count:
            raise DataError("labels out of range for class_count")
    n = a.size
    p_observed = float(np.mean(a == b))
    rates_a = np.bincount(a, minlength=class_count) / n
    rates_b = np.bincount(b, minlength=class_count) / n
    p_expected = float(rates_a @ rates_b)
    if p_expected >= 1.0:
        return 1.0
    return (p_observed - p_expected) / (1.0 - p_expected)


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min of positive / negative rank sums
    p_value: float
    n_used: int       # pairs remaining after dropping zero differences
    method: str       # "exact" or "normal"


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with mid-ranks (average ranks) for ties."""
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j < values.size and sorted_values[j] == sorted_values[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j + 1)
        i = j
    return ranks


def _exact_two_sided_p(scaled_ranks: np.ndarray, scaled_stat: int) -> float:
    """P(min rank sum <= observed) under 2^m random sign assignments.

    Ranks arrive scaled by 2 so mid-ranks become integers.  The positive
    rank sum's distribution is tabulated by convolution; counts stay exact
    because m <= EXACT_ENUMERATION_LIMIT keeps them below 2^12.
    """
    total = int(scaled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in scaled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    low = int(counts[:scaled_stat + 1].sum())
    high = int(counts[total - scaled_stat:].sum())
    overlap = 0
    if total - scaled_stat <= scaled_stat:
        overlap = int(counts[total - scaled_stat:scaled_stat + 1].sum())
    return float(low + high - overlap) / float(2 ** scaled_ranks.size)


def wilcoxon_signed_rank(xs, ys, alternative: str = "two-sided") -> WilcoxonResult:
    """Two-sided paired signed-rank test.

    Zero differences are dropped (the classical treatment), the remaining
    absolute differences are ranked with mid-ranks for ties, and the
    statistic is the smaller of the positive and negative rank sums.  For
    up to EXACT_ENUMERATION_LIMIT usable pairs the p-value is the exact
    probability, over all 2^m equally likely sign assignments, of a
    statistic at most as extreme as observed; beyond that a tie-corrected
    normal approximation with continuity correction is used.
    """
    if alternative != "two-sided":
        raise ConfigError("only the two-sided alternative is supported")
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise DataError("paired samples must be 1-D and equally long")
    if xs.size == 0:
        raise DataError("empty paired sample")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise DataError("paired samples must be finite")
    diffs = xs - ys
    diffs = diffs[diffs != 0.0]
    m = diffs.size
    if m == 0:
        raise DegeneratePairsError("all paired differences are zero")
    ranks = _midranks(np.abs(diffs))
    w_pos = float(ranks[diffs > 0].sum())
    w_neg = float(ranks[diffs < 0].sum())
    stat = min(w_pos, w_neg)
    if m <= EXACT_ENUMERATION_LIMIT:
        scaled = np.rint(2.0 * ranks).astype(np.int64)
        p = _exact_two_sided_p(scaled, int(round(2.0 * stat)))
        method = "exact"
    else:
        mean = m * (m + 1) / 4.0
        _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
        variance = (m * (m + 1) * (2 * m + 1) / 24.0
                    - float((tie_counts ** 3 - tie_counts).sum()) / 48.0)
        z = (stat - mean + 0.5) / math.sqrt(variance)
        p = min(1.0, math.erfc(-z / math.sqrt(2.0)))
        method = "normal"
    return WilcoxonResult(stat, p, m, method)
