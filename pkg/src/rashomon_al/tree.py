"""Sparse binary decision trees: prediction, regularized objective, canonical form.

A tree is a recursive structure of Split and Leaf nodes.  Split.left is the
branch taken when the split feature is 0, Split.right when it is 1.  Trees
are immutable and may share subtree objects freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .dataset import BinaryDataset
from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Split:
    feature: int
    left: "Node"   # feature == 0 branch
    right: "Node"  # feature == 1 branch


Node = Union[Leaf, Split]


def node_key(node: Node) -> str:
    """Injective pre-order text encoding, e.g. ``(f3 (leaf 0) (f1 (leaf 1) (leaf 0)))``."""
    if isinstance(node, Leaf):
        return f"(leaf {node.label})"
    return f"(f{node.feature} {node_key(node.left)} {node_key(node.right)})"


def parse_node(text: str) -> Node:
    """Inverse of node_key."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse() -> Node:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != "(":
            raise ParseError(f"expected '(' at token {pos} of {text!r}")
        pos += 1
        head = tokens[pos]
        pos += 1
        if head == "leaf":
            label = int(tokens[pos])
            pos += 1
            node: Node = Leaf(label)
        elif head.startswith("f"):
            left = parse()
            right = parse()
            node = Split(int(head[1:]), left, right)
        else:
            raise ParseError(f"unexpected token {head!r} in {text!r}")
        if tokens[pos] != ")":
            raise ParseError(f"expected ')' at token {pos} of {text!r}")
        pos += 1
        return node

    node = parse()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens in {text!r}")
    return node


@dataclass(frozen=True)
class SparseTree:
    """A decision tree over binary feature indices with labeled leaves."""

    root: Node

    @cached_property
    def n_leaves(self) -> int:
        def count(node: Node) -> int:
            if isinstance(node, Leaf):
                return 1
            return count(node.left) + count(node.right)

        return count(self.root)

    @cached_property
    def depth(self) -> int:
        def deep(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(deep(node.left), deep(node.right))

        return deep(self.root)

    @cached_property
    def key(self) -> str:
        return node_key(self.root)

    def to_text(self) -> str:
        return self.key

    def predict(self, row: np.ndarray) -> int:
        """Class id at the leaf reached by following the 0/1 branch of each split."""
        node = self.root
        while isinstance(node, Split):
            if node.feature >= len(row):
                raise ValueError(f"row has width {len(row)}, tree splits on feature {node.feature}")
            node = node.right if row[node.feature] else node.left
        return node.label

    def predict_rows(self, X: np.ndarray) -> np.ndarray:
        """Vectorized predict over a (n, n_features) matrix."""
        X = np.asarray(X)
        out = np.empty(X.shape[0], dtype=np.int64)
        _fill_predictions(self.root, X, np.arange(X.shape[0]), out)
        return out

    @classmethod
    def from_text(cls, text: str) -> "SparseTree":
        return cls(parse_node(text))


def _fill_predictions(node: Node, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, Leaf):
        out[idx] = node.label
        return
    if X.shape[1] <= node.feature:
        raise ValueError(f"rows have width {X.shape[1]}, tree splits on feature {node.feature}")
    mask = X[idx, node.feature] != 0
    _fill_predictions(node.right, X, idx[mask], out)
    _fill_predictions(node.left, X, idx[~mask], out)


def predict_matrix(trees, X: np.ndarray) -> np.ndarray:
    """Predictions of many trees over the same rows, as a (n_trees, n_rows) matrix.

    Trees from one Rashomon set share subtree objects, so predictions are
    cached per node id and each distinct subtree is evaluated once.
    """
    X = np.asarray(X)
    n = X.shape[0]
    cols = {}  # feature -> boolean column, computed on demand
    cache: dict[int, np.ndarray] = {}

    def pred(node: Node) -> np.ndarray:
        got = cache.get(id(node))
        if got is not None:
            return got
        if isinstance(node, Leaf):
            value = np.full(n, node.label, dtype=np.int64)
        else:
            col = cols.get(node.feature)
            if col is None:
                if node.feature >= X.shape[1]:
                    raise ValueError(
                        f"rows have width {X.shape[1]}, tree splits on feature {node.feature}"
                    )
                col = cols[node.feature] = X[:, node.feature] != 0
            value = np.where(col, pred(node.right), pred(node.left))
        cache[id(node)] = value
        return value

    out = np.empty((len(trees), n), dtype=np.int64)
    for i, tree in enumerate(trees):
        out[i] = pred(tree.root)
    return out


@dataclass(frozen=True)
class Objective:
    """Regularized 0-1 objective of a tree on a row subset.

    regularized = misclass_rate + lam * n_leaves, with misclass_rate taken
    over the given rows.
    """

    misclass_count: int
    misclass_rate: float
    n_leaves: int
    lam: float
    regularized: float

    @classmethod
    def from_counts(cls, misclass_count: int, n_rows: int, n_leaves: int, lam: float) -> "Objective":
        rate = misclass_count / n_rows
        return cls(
            misclass_count=misclass_count,
            misclass_rate=rate,
            n_leaves=n_leaves,
            lam=lam,
            regularized=rate + lam * n_leaves,
        )


def objective(tree: SparseTree, data: BinaryDataset, rows, lam: float) -> Objective:
    """Evaluate the regularized objective of a tree on the given row indices."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("rows must be nonempty")
    predicted = tree.predict_rows(data.features[rows])
    errors = int((predicted != data.labels[rows]).sum())
    return Objective.from_counts(errors, rows.size, tree.n_leaves, lam)


def canonicalize(tree: SparseTree) -> str:
    """Canonical key of a tree: equal trees <=> equal keys."""
    return tree.key


def validate_tree(tree: SparseTree, n_features: int, depth_cap: int | None = None) -> None:
    """Check structural invariants: feature indices in range, no feature
    repeated on a root-to-leaf path, depth within the cap."""

    def walk(node: Node, used: frozenset[int], depth: int) -> None:
        if isinstance(node, Leaf):
            return
        if not 0 <= node.feature < n_features:
            raise ValidationError(f"feature index {node.feature} out of range [0, {n_features})")
        if node.feature in used:
            raise ValidationError(f"feature {node.feature} repeats on a root-to-leaf path")
        if depth_cap is not None and depth + 1 > depth_cap:
            raise ValidationError(f"tree exceeds depth cap {depth_cap}")
        walk(node.left, used | {node.feature}, depth + 1)
        walk(node.right, used | {node.feature}, depth + 1)

    walk(tree.root, frozenset(), 0)
