"""Vote accounting, vote entropy, and majority-vote ensemble prediction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tree import SparseTree, predict_matrix


@dataclass(frozen=True, eq=False)
class Committee:
    """A nonempty set of predictors with optional positive per-member weights."""

    members: tuple[SparseTree, ...]
    weights: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("committee must have at least one member")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (len(self.members),):
                raise ValueError("weights must match member count")
            if (w <= 0).any():
                raise ValueError("weights must be positive")
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.members)


def _tallies(committee: Committee, X: np.ndarray, n_classes: int) -> np.ndarray:
    """(n_rows, n_classes) weighted vote tallies."""
    preds = predict_matrix(committee.members, X)  # (members, rows)
    n_rows = X.shape[0]
    w = committee.weights
    flat = (np.arange(n_rows)[None, :] * n_classes + preds).ravel()
    weights = None if w is None else np.repeat(w, n_rows)
    tallies = np.bincount(flat, weights=weights, minlength=n_rows * n_classes)
    return tallies.reshape(n_rows, n_classes).astype(np.float64)


def vote_counts(committee: Committee, row: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-class sum of member weights voting for that class on one row."""
    return _tallies(committee, np.asarray(row)[None, :], n_classes)[0]


def entropy_of_tallies(tallies: np.ndarray) -> np.ndarray:
    """Row-wise Shannon entropy (nats) of vote distributions; 0-vote classes contribute 0."""
    totals = tallies.sum(axis=-1, keepdims=True)
    p = tallies / totals
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p), 0.0)
    return -terms.sum(axis=-1)


def vote_entropy(committee: Committee, row: np.ndarray, n_classes: int) -> float:
    """Entropy of the committee's vote distribution on one row, in [0, ln C]."""
    return float(entropy_of_tallies(vote_counts(committee, row, n_classes)))


def ensemble_predict(committee: Committee, row: np.ndarray, n_classes: int) -> int:
    """Mode of the weighted votes; ties broken by smallest class id."""
    return int(np.argmax(vote_counts(committee, row, n_classes)))


def score_rows(committee: Committee, X: np.ndarray, n_classes: int) -> np.ndarray:
    """Vote entropy of every row in X."""
    X = np.asarray(X)
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    return entropy_of_tallies(_tallies(committee, X, n_classes))


def predict_rows(committee: Committee, X: np.ndarray, n_classes: int) -> np.ndarray:
    """Ensemble (mode) prediction for every row in X; ties to smallest class id."""
    X = np.asarray(X)
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return np.argmax(_tallies(committee, X, n_classes), axis=1)
