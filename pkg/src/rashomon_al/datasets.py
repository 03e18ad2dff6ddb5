"""Built-in dataset generators for the benchmark harness.

The MONK datasets are regenerated from their published generating rules
over the 432-point attribute grid and sampled down to the historical
training-file sizes.  Iris is binarized by three equal-frequency bins per
feature.  The *_like generators are synthetic stand-ins shaped like the
two tabular benchmarks (row/feature counts and noise level); the original
files ship with their own licenses and are not bundled.
"""

from __future__ import annotations

import itertools

import numpy as np

from .dataset import BinaryDataset, inject_label_noise, subsample_rows
from .errors import ConfigError

_MONK_VALUES = {"a1": 3, "a2": 3, "a3": 2, "a4": 3, "a5": 4, "a6": 2}


def xor_dataset() -> BinaryDataset:
    """The four-row XOR instance used throughout the tests."""
    return BinaryDataset(
        features=np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8),
        labels=np.array([0, 1, 1, 0]),
        feature_names=("f0", "f1"),
        n_classes=2,
    )


def _monk_grid() -> tuple[np.ndarray, list[str], np.ndarray]:
    """All 432 attribute combinations, one-hot encoded with the first value
    of each attribute dropped (11 binary columns); also returns the raw grid."""
    names = []
    for attr, k in _MONK_VALUES.items():
        names.extend(f"{attr}={v}" for v in range(2, k + 1))
    grid = np.array(list(itertools.product(*(range(1, k + 1) for k in _MONK_VALUES.values()))))
    columns = []
    for j, k in enumerate(_MONK_VALUES.values()):
        for v in range(2, k + 1):
            columns.append(grid[:, j] == v)
    return np.stack(columns, axis=1).astype(np.uint8), names, grid


def monk_dataset(problem: int, n_rows: int | None = None, seed: int = 7) -> BinaryDataset:
    """MONK-1 or MONK-3 regenerated from the published rules.

    problem 1: class = (a1 == a2) or (a5 == 1), sampled to 124 rows.
    problem 3: class = (a5 == 3 and a4 == 1) or (a5 != 4 and a2 != 3),
        sampled to 122 rows with 5% label noise, as in the original data.
    """
    features, names, grid = _monk_grid()
    if problem == 1:
        labels = ((grid[:, 0] == grid[:, 1]) | (grid[:, 4] == 1)).astype(np.int64)
        default_rows = 124
        noise = 0.0
    elif problem == 3:
        labels = (((grid[:, 4] == 3) & (grid[:, 3] == 1)) | ((grid[:, 4] != 4) & (grid[:, 1] != 3))).astype(np.int64)
        default_rows = 122
        noise = 0.05
    else:
        raise ConfigError(f"unknown MONK problem {problem}; supported: 1, 3")
    data = BinaryDataset(features, labels, tuple(names), 2)
    data = subsample_rows(data, n_rows or default_rows, seed)
    if noise:
        data = inject_label_noise(data, noise, seed + 1)
    return data


def iris_binarized() -> BinaryDataset:
    """Iris with each measurement cut into three equal-frequency bins,
    one-hot encoded (12 binary columns, 150 rows).  Needs scikit-learn."""
    from sklearn.datasets import load_iris  # deliberate lazy import

    bundle = load_iris()
    X, y = bundle.data, bundle.target
    columns, names = [], []
    for j, feature in enumerate(bundle.feature_names):
        cuts = np.quantile(X[:, j], [1 / 3, 2 / 3])
        bins = np.digitize(X[:, j], cuts)
        tag = feature.replace(" (cm)", "").replace(" ", "_")
        for b, label in enumerate(("low", "mid", "high")):
            columns.append(bins == b)
            names.append(f"{tag}={label}")
    return BinaryDataset(np.stack(columns, axis=1).astype(np.uint8), y.astype(np.int64), tuple(names), 3)


def synthetic_rule(
    n_rows: int = 200,
    n_features: int = 10,
    seed: int = 0,
    flip_prob: float = 0.0,
) -> BinaryDataset:
    """Random binary features with a planted sparse rule plus optional label noise.

    The clean label is (f0 and f1) or (not f0 and f2), which a depth-2/3
    tree can represent exactly; noise then controls how contested the
    near-optimal model space is.
    """
    if n_features < 3:
        raise ConfigError("synthetic_rule needs at least 3 features")
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, size=(n_rows, n_features)).astype(np.uint8)
    labels = np.where(X[:, 0] == 1, X[:, 1], X[:, 2]).astype(np.int64)
    data = BinaryDataset(X, labels, tuple(f"f{i}" for i in range(n_features)), 2)
    if flip_prob:
        data = inject_label_noise(data, flip_prob, seed + 1)
    return data


def sweep_criterion_dataset(seed: int) -> BinaryDataset:
    """200-row noisy instance for threshold-sweep studies: a 3-of-5 majority
    vote over the first five of ten features, with 15% label flips.  Depth-3
    trees cannot represent the rule exactly, which keeps the near-optimal
    model space contested on both sides of the threshold trade-off."""
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, size=(200, 10)).astype(np.uint8)
    labels = (X[:, :5].sum(axis=1) >= 3).astype(np.int64)
    data = BinaryDataset(X, labels, tuple(f"f{i}" for i in range(10)), 2)
    return inject_label_noise(data, 0.15, seed + 1)


def compas_like(seed: int = 0) -> BinaryDataset:
    """200-row, 12-feature synthetic stand-in for the recidivism benchmark."""
    return _tabular_standin(n_rows=200, n_features=12, noise=0.20, seed=seed, prefix="c")


def bar7_like(seed: int = 0) -> BinaryDataset:
    """200-row, 14-feature synthetic stand-in for the coupon benchmark."""
    return _tabular_standin(n_rows=200, n_features=14, noise=0.25, seed=seed, prefix="b")


def _tabular_standin(n_rows: int, n_features: int, noise: float, seed: int, prefix: str) -> BinaryDataset:
    # oversample then subsample, mirroring how the benchmarks were reduced to 200 rows
    rng = np.random.default_rng(seed)
    big = 5 * n_rows
    probs = rng.uniform(0.2, 0.8, size=n_features)
    X = (rng.random((big, n_features)) < probs[None, :]).astype(np.uint8)
    score = X[:, 0] + X[:, 1] + (X[:, 2] & X[:, 3]) + (1 - X[:, 4])
    labels = (score >= 2).astype(np.int64)
    data = BinaryDataset(X, labels, tuple(f"{prefix}{i}" for i in range(n_features)), 2)
    data = inject_label_noise(data, noise, seed + 1)
    return subsample_rows(data, n_rows, seed + 2)


GENERATORS = {
    "xor": xor_dataset,
    "monk1": lambda: monk_dataset(1),
    "monk3": lambda: monk_dataset(3),
    "iris": iris_binarized,
    "compas_like": compas_like,
    "bar7_like": bar7_like,
    "synthetic_noisy": lambda: synthetic_rule(n_rows=200, n_features=10, seed=0, flip_prob=0.15),
}
