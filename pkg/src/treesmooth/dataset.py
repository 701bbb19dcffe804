"""Tabular classification data: CSV ingestion, stratified splitting, and
the built-in two-Gaussian synthetic generator.

No scaling or imputation happens anywhere in this module: numeric features
pass through unchanged and rows with missing cells are removed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .seeding import make_rng

DEFAULT_FRACTIONS = (0.5, 0.25, 0.25)


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric feature matrix with dense integer class labels."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_count: int

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        if labels.shape != (features.shape[0],):
            raise DataError("labels must align with feature rows")
        if labels.size == 0:
            raise DataError("dataset has no rows")
        if not np.isfinite(features).all():
            raise DataError("feature matrix contains NaN or infinite values")
        if self.class_count < 2:
            raise DataError("need at least 2 classes")
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise DataError("labels must be dense ids in [0, class_count)")
        counts = np.bincount(labels, minlength=self.class_count)
        if (counts < 2).any():
            raise DataError("every class needs at least 2 instances")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != features.shape[1]:
            raise DataError("feature_names must match feature columns")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_instances(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def take(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Row view ``(features, labels)`` for an index array."""
        return self.features[idx], self.labels[idx]


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/valid/test row indices into one dataset."""

    train_idx: np.ndarray
    valid_idx: np.ndarray
    test_idx: np.ndarray

    def __post_init__(self) -> None:
        parts = []
        for name in ("train_idx", "valid_idx", "test_idx"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            parts.append(arr)
        merged = np.concatenate(parts)
        if merged.size == 0:
            raise DataError("split has no indices")
        if merged.min() < 0 or np.unique(merged).size != merged.size:
            raise DataError("split parts must be disjoint non-negative indices")


def _resolve_column(header: list[str], target_column) -> int:
    if isinstance(target_column, (int, np.integer)):
        idx = int(target_column)
        if idx < 0:
            idx += len(header)
        if not 0 <= idx < len(header):
            raise DataError(f"target column index {target_column} out of range")
        return idx
    name = str(target_column)
    if name in header:
        return header.index(name)
    try:
        return _resolve_column(header, int(name))
    except ValueError:
        raise DataError(f"target column {name!r} not found") from None


def _is_missing(cell: str) -> bool:
    return cell.strip() == ""


def _try_float(cell: str):
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, target_column, categorical_policy: str = "drop") -> Dataset:
    """Load a comma-separated, UTF-8 table with one header row.

    Empty cells count as missing (so do numeric cells parsing to NaN/inf).
    A feature column is numeric when every non-missing cell parses as a
    float; other columns are categorical and are dropped or one-hot
    encoded per ``categorical_policy``.  Rows with a missing cell in any
    surviving column (or the target) are removed, so under the ``drop``
    policy missing values confined to categorical columns do not cost
    rows.  Target values are raw strings mapped to dense ids 0..C-1 in
    first-appearance order.
    """
    if categorical_policy not in ("drop", "onehot"):
        raise ConfigError(f"unknown categorical policy {categorical_policy!r}")
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError("CSV needs a header row and at least one data row")
    header, body = rows[0], rows[1:]
    width = len(header)
    if any(len(r) != width for r in body):
        raise DataError("ragged CSV: every row must match the header width")

    target = _resolve_column(header, target_column)
    feature_cols = [j for j in range(width) if j != target]
    numeric_cols = set()
    for j in feature_cols:
        cells = [r[j] for r in body if not _is_missing(r[j])]
        if all(_try_float(c) is not None for c in cells):
            numeric_cols.add(j)
    kept = [j for j in feature_cols
            if j in numeric_cols or categorical_policy == "onehot"]

    survivors = []
    for r in body:
        if any(_is_missing(r[j]) for j in [*kept, target]):
            continue
        if any(not np.isfinite(float(r[j])) for j in kept if j in numeric_cols):
            continue
        survivors.append(r)
    if not survivors:
        raise DataError("no rows remain after removing missing data")

    label_ids: dict[str, int] = {}
    labels = [label_ids.setdefault(r[target].strip(), len(label_ids))
              for r in survivors]
    if len(label_ids) < 2:
        raise DataError("fewer than 2 classes after cleaning")

    columns: list[list[float]] = []
    names: list[str] = []
    for j in kept:
        if j in numeric_cols:
            names.append(header[j])
            columns.append([float(r[j]) for r in survivors])
        else:
            cells = [r[j].strip() for r in survivors]
            levels: list[str] = []
            for c in cells:
                if c not in levels:
                    levels.append(c)
            for level in levels:
                names.append(f"{header[j]}={level}")
                columns.append([1.0 if c == level else 0.0 for c in cells])
    if not columns:
        raise DataError("no usable feature columns")

    features = np.array(columns, dtype=np.float64).T
    return Dataset(features, np.array(labels), tuple(names), len(label_ids))


def save_csv(dataset: Dataset, path, target_name: str = "target") -> None:
    """Write a dataset in the same CSV format :func:`load_csv` reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*dataset.feature_names, target_name])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def stratified_split(dataset: Dataset, fractions=DEFAULT_FRACTIONS,
                     rng: np.random.Generator | None = None) -> SplitSpec:
    """Per-class randomized train/valid/test split.

    Valid and test receive ``floor(fraction * class_size)`` instances of
    each class; the remainder goes to train, which is therefore never
    smaller than its nominal share.  Deterministic given the generator.
    """
    if rng is None:
        raise ConfigError("stratified_split requires an explicit generator")
    fr = tuple(float(f) for f in fractions)
    if len(fr) != 3 or any(f <= 0 for f in fr) or abs(sum(fr) - 1.0) > 1e-9:
        raise ConfigError("fractions must be three positive numbers summing to 1")
    train, valid, test = [], [], []
    for c in range(dataset.class_count):
        members = np.flatnonzero(dataset.labels == c)
        n_valid = int(np.floor(fr[1] * members.size))
        n_test = int(np.floor(fr[2] * members.size))
        n_train = members.size - n_valid - n_test
        if min(n_train, n_valid, n_test) < 1:
            raise DataError(
                f"class {c} has {members.size} instances: too few to stratify")
        perm = rng.permutation(members)
        train.append(perm[:n_train])
        valid.append(perm[n_train:n_train + n_valid])
        test.append(perm[n_train + n_valid:])
    return SplitSpec(np.sort(np.concatenate(train)),
                     np.sort(np.concatenate(valid)),
                     np.sort(np.concatenate(test)))


def generate_gaussian_pair(n: int = 1000, d: int = 3, separation: float = 2.0,
                           rng: np.random.Generator | None = None) -> Dataset:
    """Two identity-covariance Gaussian classes of ``n/2`` instances each.

    Class 0 is centered at the origin, class 1 at
    ``separation * (1, ..., 1) / sqrt(d)``, so ``separation`` is the
    Euclidean distance between the class means.
    """
    if rng is None:
        raise ConfigError("generate_gaussian_pair requires an explicit generator")
    if n < 4 or n % 2:
        raise ConfigError("n must be an even number >= 4")
    if d < 1:
        raise ConfigError("d must be >= 1")
    if not (np.isfinite(separation) and separation > 0):
        raise ConfigError("separation must be positive")
    half = n // 2
    mean = separation * np.ones(d) / np.sqrt(d)
    features = np.vstack([rng.standard_normal((half, d)),
                          rng.standard_normal((half, d)) + mean])
    labels = np.repeat([0, 1], half)
    return Dataset(features, labels, tuple(f"x{j}" for j in range(d)), 2)


def subsample_iteration(dataset: Dataset, i: int, master_seed: int,
                        fractions=DEFAULT_FRACTIONS) -> SplitSpec:
    """Split for repetition ``i``, seeded by ``(master_seed, "split", i)``."""
    if i < 0:
        raise ConfigError("repetition index must be non-negative")
    return stratified_split(dataset, fractions, make_rng(master_seed, "split", i))
