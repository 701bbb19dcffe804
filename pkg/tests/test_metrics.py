import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import kappa_contingency, wilcoxon_enumerate
from treesmooth.errors import ConfigError, DataError, DegeneratePairsError
from treesmooth.metrics import (accuracy, cohens_kappa, wilcoxon_signed_rank)


# ---------------------------------------------------------------------------
# accuracy
# ---------------------------------------------------------------------------

def test_accuracy_trivial_cases():
    assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0
    assert accuracy([1, 1, 0], [0, 0, 1]) == 0.0
    assert accuracy([1, 1, 0, 0], [1, 0, 0, 0]) == 0.75


def test_accuracy_errors():
    with pytest.raises(DataError):
        accuracy([1, 2], [1])
    with pytest.raises(DataError):
        accuracy([], [])


# ---------------------------------------------------------------------------
# Cohen's kappa
# ---------------------------------------------------------------------------

def test_kappa_trivial_values():
    assert cohens_kappa([0, 1, 0, 1], [0, 1, 0, 1], 2) == 1.0
    assert cohens_kappa([1, 1, 1], [0, 0, 0], 2) == 0.0
    assert cohens_kappa([1, 1, 0, 0], [1, 0, 0, 0], 2) == 0.5


def test_kappa_constant_same_class_convention():
    assert cohens_kappa([1, 1, 1], [1, 1, 1], 2) == 1.0


def test_kappa_matches_contingency_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        classes = int(rng.integers(2, 6))
        n = int(rng.integers(1, 50))
        a = rng.integers(0, classes, size=n)
        b = rng.integers(0, classes, size=n)
        assert cohens_kappa(a, b, classes) == pytest.approx(
            kappa_contingency(a, b, classes), abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                min_size=1, max_size=30))
def test_kappa_is_symmetric(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    assert cohens_kappa(a, b, 4) == pytest.approx(cohens_kappa(b, a, 4), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)),
                min_size=2, max_size=25))
def test_kappa_one_iff_equal(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    if np.array_equal(a, b):
        assert cohens_kappa(a, b, 3) == 1.0
    else:
        assert cohens_kappa(a, b, 3) < 1.0


def test_kappa_errors():
    with pytest.raises(DataError):
        cohens_kappa([0, 1], [0], 2)
    with pytest.raises(DataError):
        cohens_kappa([0, 5], [0, 1], 2)
    with pytest.raises(ConfigError):
        cohens_kappa([0, 0], [0, 0], 1)


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank
# ---------------------------------------------------------------------------

def test_wilcoxon_all_zero_differences_is_degenerate():
    with pytest.raises(DegeneratePairsError):
        wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])


def test_wilcoxon_five_positive_differences_exact():
    xs = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    outcome = wilcoxon_signed_rank(xs, np.zeros(5))
    assert outcome.method == "exact"
    assert outcome.statistic == 0.0
    assert outcome.p_value == 2 / 32  # only the two all-same-sign assignments


def test_wilcoxon_consistent_shift_rejects_at_30_pairs():
    rng = np.random.default_rng(1)
    ys = rng.normal(0.0, 1.0, 30)
    xs = ys + rng.uniform(0.5, 1.0, 30)
    outcome = wilcoxon_signed_rank(xs, ys)
    assert outcome.method == "normal"
    assert outcome.p_value < 0.05


def test_wilcoxon_no_tie_30_pair_consistent_sign_value():
    # all 30 differences positive, no ties: W=0, mu=232.5, sigma^2=2363.75
    xs = np.arange(1.0, 31.0)
    outcome = wilcoxon_signed_rank(xs, np.zeros(30))
    z = (0.0 - 232.5 + 0.5) / math.sqrt(2363.75)
    expected = math.erfc(-z / math.sqrt(2.0))
    assert outcome.p_value == pytest.approx(expected, rel=1e-12)
    assert outcome.p_value == pytest.approx(1.83e-06, rel=0.01)


def test_wilcoxon_exact_matches_enumeration_oracle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        m = int(rng.integers(1, 13))
        diffs = rng.integers(-3, 4, size=m).astype(float)
        if not (diffs != 0).any():
            diffs[rng.integers(0, m)] = 1.0
        xs = rng.normal(size=m)
        outcome = wilcoxon_signed_rank(xs + diffs, xs)
        statistic, p_expected = wilcoxon_enumerate(xs + diffs, xs)
        assert outcome.method == "exact"
        assert outcome.statistic == pytest.approx(statistic, abs=1e-12)
        assert outcome.p_value == pytest.approx(p_expected, abs=1e-15)


def test_wilcoxon_normal_path_matches_scipy():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = int(rng.integers(13, 40))
        xs = rng.normal(0.3, 1.0, m)
        ys = np.round(xs - rng.normal(0.4, 1.2, m), 1)  # rounding makes ties
        diffs = xs - ys
        if not (diffs != 0).any():
            continue
        outcome = wilcoxon_signed_rank(xs, ys)
        reference = scipy.stats.wilcoxon(xs, ys, zero_method="wilcox",
                                         correction=True, mode="approx")
        assert outcome.method == "normal"
        assert outcome.p_value == pytest.approx(reference.pvalue, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=1, max_size=10))
def test_wilcoxon_two_sided_symmetry(diffs):
    diffs = np.array(diffs, dtype=float)
    if not (diffs != 0).any():
        diffs[0] = 1.0
    zeros = np.zeros_like(diffs)
    forward = wilcoxon_signed_rank(diffs, zeros)
    backward = wilcoxon_signed_rank(zeros, diffs)  # negated differences
    assert forward.p_value == pytest.approx(backward.p_value, abs=1e-15)
    assert forward.statistic == pytest.approx(backward.statistic, abs=1e-12)


def test_wilcoxon_rejects_other_alternatives_and_bad_input():
    with pytest.raises(ConfigError):
        wilcoxon_signed_rank([1.0], [0.0], alternative="greater")
    with pytest.raises(DataError):
        wilcoxon_signed_rank([1.0, 2.0], [0.0])
    with pytest.raises(DataError):
        wilcoxon_signed_rank([np.inf], [0.0])
