"""Loading, validation, splitting, and noise corruption of binarized datasets.

A dataset is a table of 0/1 feature values with an integer class label per
row.  Files are UTF-8 CSV with a header row; every column except the last is
a feature, the last column is the label, and labels must be contiguous ids
starting at 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParseError, ValidationError


@dataclass(frozen=True, eq=False)
class BinaryDataset:
    """Immutable table of binary features plus integer class labels.

    Attributes:
        features: (n_rows, n_features) array with values in {0, 1}.
        labels: (n_rows,) array with values in [0, n_classes).
        feature_names: one name per feature column.
        n_classes: number of classes C (>= 2).
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    n_classes: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.uint8)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValidationError("features must be a non-empty 2-D array")
        if labels.shape != (features.shape[0],):
            raise ValidationError("labels must have one entry per row")
        if len(self.feature_names) != features.shape[1]:
            raise ValidationError("feature_names must have one entry per column")
        if self.n_classes < 2:
            raise ValidationError("n_classes must be at least 2")
        if features.size and not np.isin(features, (0, 1)).all():
            raise ValidationError("all feature values must be 0 or 1")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise ValidationError("labels must lie in [0, n_classes)")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class SplitIndices:
    """Disjoint train/candidate/test row indices covering a whole dataset."""

    train: np.ndarray
    candidate: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("train", "candidate", "test"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def load_csv(path, n_classes: int | None = None) -> BinaryDataset:
    """Load a dataset from CSV.

    The header row gives the column names; the final column is the label.
    Every feature cell must be exactly "0" or "1" and labels must be
    contiguous integers starting at 0.

    Args:
        path: file to read.
        n_classes: optional explicit class count; inferred as
            max(label) + 1 (but at least 2) when omitted.

    Raises:
        ParseError: a cell fails to parse, with its row/column coordinate.
        ValidationError: structural problems (empty file, gap in label ids,
            n_classes smaller than an observed label).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: file is empty") from None
        if len(header) < 2:
            raise ValidationError(f"{path}: need at least one feature column and a label column")
        rows = []
        labels = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(record)}")
            feats = []
            for col, cell in enumerate(record[:-1]):
                value = cell.strip()
                if value not in ("0", "1"):
                    raise ParseError(
                        f"{path}:{lineno}: column {header[col]!r}: feature cell {cell!r} is not 0/1"
                    )
                feats.append(int(value))
            try:
                labels.append(int(record[-1].strip()))
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: column {header[-1]!r}: label cell {record[-1]!r} is not an integer"
                ) from None
            rows.append(feats)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    label_arr = np.array(labels, dtype=np.int64)
    if label_arr.min() < 0:
        raise ValidationError(f"{path}: negative label id {label_arr.min()}")
    observed = np.unique(label_arr)
    if not np.array_equal(observed, np.arange(observed[-1] + 1)):
        raise ValidationError(f"{path}: label ids are not contiguous from 0 (saw {observed.tolist()})")
    inferred = max(int(observed[-1]) + 1, 2)
    if n_classes is None:
        n_classes = inferred
    elif n_classes < int(observed[-1]) + 1:
        raise ValidationError(f"{path}: n_classes={n_classes} smaller than observed label {observed[-1]}")
    return BinaryDataset(
        features=np.array(rows, dtype=np.uint8),
        labels=label_arr,
        feature_names=tuple(header[:-1]),
        n_classes=n_classes,
    )


def write_csv(data: BinaryDataset, path, label_name: str = "label") -> None:
    """Write a dataset in the format load_csv reads (round-trips exactly)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.feature_names) + [label_name])
        for row, label in zip(data.features, data.labels):
            writer.writerow([int(v) for v in row] + [int(label)])


def split(data: BinaryDataset, test_frac: float, init_train_frac: float, seed: int) -> SplitIndices:
    """Partition row indices into test, initial-train, and candidate pools.

    The test set takes ceil(test_frac * n) rows uniformly at random; of the
    remainder, the initial training set takes floor(init_train_frac * rest)
    and everything else becomes the candidate pool.  This rounding (ceil for
    test, floor for train, remainder to candidate) reproduces the benchmark
    protocol sizes exactly, e.g. 124 rows -> 25/19/80.

    Raises:
        ConfigError: a fraction is out of (0, 1) or a partition comes up empty.
    """
    if not 0 < test_frac < 1:
        raise ConfigError(f"test_frac must be in (0, 1), got {test_frac}")
    if not 0 < init_train_frac < 1:
        raise ConfigError(f"init_train_frac must be in (0, 1), got {init_train_frac}")
    n = data.n_rows
    n_test = math.ceil(test_frac * n)
    n_train = math.floor(init_train_frac * (n - n_test))
    n_candidate = n - n_test - n_train
    if min(n_test, n_train, n_candidate) < 1:
        raise ConfigError(
            f"fractions ({test_frac}, {init_train_frac}) leave an empty partition for n={n} "
            f"(test={n_test}, train={n_train}, candidate={n_candidate})"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    test = np.sort(order[:n_test])
    train = np.sort(order[n_test : n_test + n_train])
    candidate = np.sort(order[n_test + n_train :])
    return SplitIndices(train=train, candidate=candidate, test=test, seed=seed)


def inject_label_noise(data: BinaryDataset, flip_prob: float, seed: int) -> BinaryDataset:
    """Flip each label, independently with probability flip_prob, to a
    uniformly random different class.  Features are untouched.
    """
    if not 0 <= flip_prob <= 1:
        raise ConfigError(f"flip_prob must be in [0, 1], got {flip_prob}")
    rng = np.random.default_rng(seed)
    flip = rng.random(data.n_rows) < flip_prob
    # offset in [1, C) guarantees the replacement class differs from the original
    offsets = rng.integers(1, data.n_classes, size=data.n_rows)
    labels = data.labels.copy()
    labels[flip] = (labels[flip] + offsets[flip]) % data.n_classes
    return BinaryDataset(
        features=data.features,
        labels=labels,
        feature_names=data.feature_names,
        n_classes=data.n_classes,
    )


def subsample_rows(data: BinaryDataset, n_rows: int, seed: int) -> BinaryDataset:
    """Keep a uniform random subset of n_rows rows (order preserved)."""
    if not 1 <= n_rows <= data.n_rows:
        raise ConfigError(f"n_rows must be in [1, {data.n_rows}], got {n_rows}")
    if n_rows == data.n_rows:
        return data
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(data.n_rows, size=n_rows, replace=False))
    return BinaryDataset(
        features=data.features[keep],
        labels=data.labels[keep],
        feature_names=data.feature_names,
        n_classes=data.n_classes,
    )
