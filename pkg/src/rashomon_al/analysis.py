"""Evaluation metrics, the threshold sweep, and paired signed-rank comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .committee import Committee, predict_rows
from .dataset import BinaryDataset, SplitIndices
from .enumerator import EnumConfig, enumerate_rashomon
from .errors import ConfigError
from .patterns import group_patterns, unique_representatives
from .tree import predict_matrix


def f1_score(predicted, actual, n_classes: int) -> float:
    """F1 of hard predictions.

    Binary problems use class 1 as positive: 2TP / (2TP + FP + FN).
    Multiclass problems take the macro average of one-vs-rest F1 scores.
    A class with no actual and no predicted instances contributes F1 = 1
    (nothing to get wrong), which also covers the degenerate binary case.
    """
    predicted = np.asarray(predicted, dtype=np.int64)
    actual = np.asarray(actual, dtype=np.int64)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise ValueError("predicted and actual must be 1-D and the same length")
    if predicted.size == 0:
        raise ValueError("predicted and actual must be nonempty")

    def one_vs_rest(cls: int) -> float:
        tp = int(np.sum((predicted == cls) & (actual == cls)))
        fp = int(np.sum((predicted == cls) & (actual != cls)))
        fn = int(np.sum((predicted != cls) & (actual == cls)))
        denominator = 2 * tp + fp + fn
        if denominator == 0:
            return 1.0
        return 2 * tp / denominator

    if n_classes == 2:
        return one_vs_rest(1)
    return float(np.mean([one_vs_rest(c) for c in range(n_classes)]))


@dataclass(frozen=True)
class SweepRow:
    """One grid point of the threshold sweep."""

    epsilon: float
    n_trees: int
    n_unique_patterns: int
    ensemble_test_error: float
    mean_member_accuracy: float
    truncated: bool


def sweep_threshold(
    data: BinaryDataset,
    split: SplitIndices,
    lam: float,
    epsilon_grid,
    depth_cap: int = 3,
    max_trees: int = 200_000,
) -> tuple[list[SweepRow], float]:
    """Trade-off curve of ensemble test error against the Rashomon threshold.

    For each epsilon the Rashomon set is enumerated on the training split;
    the unique-pattern committee (grouped on the candidate pool) is
    mode-ensembled on the test split, and the mean per-member test accuracy
    over all trees is reported alongside.  Returns the rows (ascending in
    epsilon) and the epsilon minimizing ensemble test error, ties to the
    smallest epsilon.
    """
    grid = [float(e) for e in epsilon_grid]
    if not grid:
        raise ConfigError("epsilon grid must be nonempty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigError("epsilon grid must be ascending")
    rows = []
    test_X = data.features[split.test]
    test_y = data.labels[split.test]
    for epsilon in grid:
        cfg = EnumConfig(lam=lam, epsilon=epsilon, depth_cap=depth_cap, max_trees=max_trees)
        rset = enumerate_rashomon(data, split.train, cfg)
        groups = group_patterns(rset, data.features[split.candidate])
        committee = Committee(tuple(unique_representatives(groups, rset)))
        ensemble = predict_rows(committee, test_X, data.n_classes)
        member_preds = predict_matrix(rset.trees, test_X)
        member_acc = float(np.mean(member_preds == test_y[None, :]))
        rows.append(
            SweepRow(
                epsilon=epsilon,
                n_trees=rset.n_trees,
                n_unique_patterns=len(groups),
                ensemble_test_error=float(np.mean(ensemble != test_y)),
                mean_member_accuracy=member_acc,
                truncated=rset.truncated,
            )
        )
    return rows, pick_epsilon(rows)


def pick_epsilon(rows: list[SweepRow], slack: float = 0.0) -> float:
    """Argmin-error epsilon (ties to smallest) plus an optional additive slack."""
    best = min(rows, key=lambda r: (r.ensemble_test_error, r.epsilon))
    return best.epsilon + slack


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def wilcoxon_signed_rank(a, b, alternative: str = "two-sided") -> float:
    """Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped (all-zero input returns 1.0 by convention,
    which is what a strategy compared against itself produces).  For n <= 12
    retained pairs the p-value is exact, by enumerating all 2^n sign
    assignments over the midranks of |differences|; beyond that a normal
    approximation with tie and continuity corrections is used.

    alternative: "two-sided", "greater" (a tends to exceed b), or "less".
    """
    if alternative not in ("two-sided", "greater", "less"):
        raise ConfigError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be 1-D and the same length")
    diffs = a - b
    diffs = diffs[diffs != 0]
    if diffs.size == 0:
        return 1.0
    n = diffs.size
    if n < 5:
        raise ValueError(f"need at least 5 nonzero differences, got {n}")
    ranks = _midranks(np.abs(diffs))
    w_observed = float(np.sum(np.sign(diffs) * ranks))
    if n <= 12:
        signs = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1) * 2 - 1
        w_all = signs @ ranks
        tol = 1e-9
        if alternative == "two-sided":
            return float(np.mean(np.abs(w_all) >= abs(w_observed) - tol))
        if alternative == "greater":
            return float(np.mean(w_all >= w_observed - tol))
        return float(np.mean(w_all <= w_observed + tol))
    t_plus = float(ranks[diffs > 0].sum())
    mean = n * (n + 1) / 4
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24 - float(((tie_counts**3 - tie_counts) / 48).sum())
    sd = math.sqrt(variance)
    if alternative == "two-sided":
        z = (abs(t_plus - mean) - 0.5) / sd
        return min(1.0, 2 * _normal_sf(z))
    if alternative == "greater":
        return _normal_sf((t_plus - mean - 0.5) / sd)
    return _normal_sf(-(t_plus - mean + 0.5) / sd)


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2))


def relative_error_curves(errors_by_strategy: dict[str, np.ndarray], baseline: str):
    """Per-iteration mean error deltas against a baseline strategy.

    errors_by_strategy maps a strategy name to a (replications, iterations)
    array of test errors; replications are paired positionally (same seeds).
    Returns {strategy: (delta_mean, delta_se)} with arrays over iterations;
    the baseline maps to zeros.
    """
    if baseline not in errors_by_strategy:
        raise ValueError(f"baseline {baseline!r} missing from inputs")
    base = np.asarray(errors_by_strategy[baseline], dtype=np.float64)
    out = {}
    for name, errors in errors_by_strategy.items():
        errors = np.asarray(errors, dtype=np.float64)
        if errors.shape != base.shape:
            raise ValueError(
                f"strategy {name!r} grid {errors.shape} does not match baseline grid {base.shape}"
            )
        deltas = errors - base
        mean = deltas.mean(axis=0)
        if deltas.shape[0] > 1:
            se = deltas.std(axis=0, ddof=1) / math.sqrt(deltas.shape[0])
        else:
            se = np.zeros(deltas.shape[1])
        out[name] = (mean, se)
    return out
