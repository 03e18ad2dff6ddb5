"""Bagged greedy-tree baseline committee (the random-forest comparator).

Trees are grown CART-style on bootstrap resamples: best Gini split over a
random feature subset per node, until purity, the depth cap, or no split
reduces impurity.  Each tree satisfies the same structural invariants as the
enumerated sparse trees (valid indices, no feature repeated on a path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .committee import Committee
from .dataset import BinaryDataset
from .errors import ConfigError
from .tree import Leaf, Node, SparseTree, Split


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    feature_subsample: int | None = None  # default ceil(sqrt(n_features))
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")


def _gini_best_split(X: np.ndarray, y_onehot: np.ndarray, candidates: np.ndarray):
    """Best (feature, weighted-Gini) among candidate features, or None.

    Degenerate splits (a side with no rows) are excluded.
    """
    m = X.shape[0]
    counts1 = X[:, candidates].T.astype(np.float64) @ y_onehot  # (k, C)
    totals = y_onehot.sum(axis=0)
    counts0 = totals[None, :] - counts1
    n1 = counts1.sum(axis=1)
    n0 = m - n1
    valid = (n0 > 0) & (n1 > 0)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        gini0 = 1.0 - np.where(n0 > 0, (counts0**2).sum(axis=1) / n0**2, 0.0)
        gini1 = 1.0 - np.where(n1 > 0, (counts1**2).sum(axis=1) / n1**2, 0.0)
    weighted = (n0 * gini0 + n1 * gini1) / m
    weighted[~valid] = np.inf
    best = int(np.argmin(weighted))
    return int(candidates[best]), float(weighted[best])


def greedy_tree(
    data: BinaryDataset,
    rows,
    depth_cap: int,
    feature_pool=None,
    seed: int = 0,
    feature_subsample: int | None = None,
) -> SparseTree:
    """Recursive best-Gini tree on the given rows.

    A node becomes a leaf when pure, at the depth cap, or when no candidate
    feature still separates its rows; leaf labels are the majority class
    with ties going to the smallest class id.
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("rows must be nonempty")
    if feature_pool is None:
        feature_pool = np.arange(data.n_features)
    else:
        feature_pool = np.asarray(feature_pool, dtype=np.int64)
    rng = np.random.default_rng(seed)
    X = data.features
    y = data.labels
    eye = np.eye(data.n_classes, dtype=np.float64)

    def grow(idx: np.ndarray, depth: int) -> Node:
        counts = np.bincount(y[idx], minlength=data.n_classes)
        majority = int(np.argmax(counts))
        if counts[majority] == idx.size or depth >= depth_cap:
            return Leaf(majority)
        k = feature_subsample or feature_pool.size
        k = min(k, feature_pool.size)
        if k < feature_pool.size:
            candidates = np.sort(rng.choice(feature_pool, size=k, replace=False))
        else:
            candidates = feature_pool
        found = _gini_best_split(X[idx], eye[y[idx]], np.asarray(candidates))
        if found is None:
            return Leaf(majority)
        feature, weighted = found
        # children's weighted Gini never exceeds the parent's, so zero-gain
        # (tie) splits are taken; without them parity structure is unlearnable
        parent_gini = 1.0 - ((counts / idx.size) ** 2).sum()
        if weighted > parent_gini + 1e-9:
            return Leaf(majority)
        ones = X[idx, feature] != 0
        return Split(feature, grow(idx[~ones], depth + 1), grow(idx[ones], depth + 1))

    return SparseTree(grow(rows, 0))


def train_forest(data: BinaryDataset, rows, cfg: ForestConfig) -> Committee:
    """Bag cfg.n_trees greedy trees into an unweighted committee."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("rows must be nonempty")
    k = cfg.feature_subsample or math.ceil(math.sqrt(data.n_features))
    rng = np.random.default_rng(cfg.seed)
    trees = []
    for _ in range(cfg.n_trees):
        sample = rows[rng.integers(0, rows.size, size=rows.size)] if cfg.bootstrap else rows
        tree_seed = int(rng.integers(0, 2**63 - 1))
        trees.append(
            greedy_tree(
                data,
                sample,
                depth_cap=cfg.max_depth,
                seed=tree_seed,
                feature_subsample=k,
            )
        )
    return Committee(members=tuple(trees))
