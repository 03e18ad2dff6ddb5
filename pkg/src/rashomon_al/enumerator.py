"""Exact enumeration of the Rashomon set of sparse binary decision trees.

The model space over a training row set contains every tree that
  * splits only on features that actually separate the rows reaching the
    node (so both children receive at least one row, which also rules out
    repeating a feature along a path),
  * respects the depth cap, and
  * labels each leaf with a class of maximal count among the rows reaching
    it; exact ties produce one tree per tied label, since those are
    distinct models.

The Rashomon set collects every member whose regularized objective
(misclassification rate over the training rows plus lam per leaf) is within
epsilon of the empirical minimum, boundary inclusive.

Two independent implementations are provided: a branch-and-bound search
over (row-subset, remaining-depth) subproblems with bitset memoization, and
a guard-limited brute-force generator used as a verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import BinaryDataset
from .errors import ConfigError, ResourceLimitError
from .tree import Leaf, Node, Objective, SparseTree, Split, objective

# Members are admitted when cost <= optimal + epsilon + MEMBER_TOL; both the
# search and the oracle apply this same rule, so set equality is exact.
MEMBER_TOL = 1e-12
# Interior prunes use a looser slop so float drift in propagated budgets can
# never exclude a genuine member; overshoot is removed by the final filter.
_PRUNE_SLOP = 1e-9


@dataclass(frozen=True)
class EnumConfig:
    """Search bounds: per-leaf penalty, Rashomon threshold, depth cap, tree cap."""

    lam: float
    epsilon: float
    depth_cap: int = 3
    max_trees: int = 200_000

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.lam < 0:
            raise ConfigError(f"lam must be >= 0, got {self.lam}")
        if self.depth_cap < 0:
            raise ConfigError(f"depth_cap must be >= 0, got {self.depth_cap}")
        if self.max_trees < 1:
            raise ConfigError(f"max_trees must be >= 1, got {self.max_trees}")


@dataclass(frozen=True)
class RashomonSet:
    """All trees within epsilon of the optimal regularized objective.

    trees/objectives are parallel sequences sorted by (regularized
    objective, canonical key).  truncated is set when max_trees stopped the
    enumeration early; in that case the set is still a valid subset of the
    Rashomon set and contains an empirical risk minimizer.
    """

    optimal_objective: Objective
    trees: tuple[SparseTree, ...]
    objectives: tuple[Objective, ...]
    epsilon: float
    truncated: bool

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def __len__(self) -> int:
        return len(self.trees)


class _Truncated(Exception):
    pass


class _Search:
    """Branch-and-bound enumeration engine over row-bitset subproblems.

    Rows of the training subset are numbered 0..m-1 and represented as bits
    of a Python int.  Subtree costs are tracked as exact integer pairs
    (misclassified rows, leaves); the float objective err/N + lam*leaves is
    derived from the pair in one place so identical pairs always compare
    equal.
    """

    def __init__(self, data: BinaryDataset, rows: np.ndarray, cfg: EnumConfig):
        self.cfg = cfg
        self.n = int(rows.size)
        self.lam = cfg.lam
        X = data.features[rows]
        y = data.labels[rows]
        self.n_classes = data.n_classes
        # bit i of a subset corresponds to rows[i]
        self.feature_ones = [_mask(X[:, f] != 0) for f in range(data.n_features)]
        self.class_masks = [_mask(y == c) for c in range(data.n_classes)]
        self.universe = (1 << self.n) - 1
        self._leaf_stats: dict[int, tuple[int, tuple[int, ...]]] = {}
        self._best: dict[tuple[int, int], float] = {}
        # (subset, depth) -> (budget the list was built at, entries sorted by cost)
        self._lists: dict[tuple[int, int], tuple[float, list]] = {}
        self.root_count = 0
        self.total_count = 0
        self.work_cap = 50 * cfg.max_trees
        self.root_progress: list = []

    def cost(self, errs: int, leaves: int) -> float:
        return errs / self.n + self.lam * leaves

    def leaf_stats(self, subset: int) -> tuple[int, tuple[int, ...]]:
        """(misclassified count, labels attaining the majority) for a leaf on subset."""
        got = self._leaf_stats.get(subset)
        if got is not None:
            return got
        counts = [(subset & mask).bit_count() for mask in self.class_masks]
        top = max(counts)
        stats = (subset.bit_count() - top, tuple(c for c, k in enumerate(counts) if k == top))
        self._leaf_stats[subset] = stats
        return stats

    def best(self, subset: int, depth: int) -> float:
        """Exact minimal cost of any admissible subtree on (subset, depth)."""
        key = (subset, depth)
        got = self._best.get(key)
        if got is not None:
            return got
        errs, _ = self.leaf_stats(subset)
        value = self.cost(errs, 1)
        if depth >= 1 and errs > 0:
            for ones in self.feature_ones:
                sub1 = subset & ones
                if sub1 == 0 or sub1 == subset:
                    continue
                split_cost = self.best(subset ^ sub1, depth - 1) + self.best(sub1, depth - 1)
                if split_cost < value:
                    value = split_cost
        self._best[key] = value
        return value

    def enum(self, subset: int, depth: int, budget: float, root: bool = False) -> list:
        """All admissible subtrees on (subset, depth) with cost <= budget (+slop),
        as (errs, leaves, node) entries sorted by cost."""
        key = (subset, depth)
        got = self._lists.get(key)
        if got is not None and budget <= got[0] + 1e-15:
            return got[1]
        entries = self._build(subset, depth, budget, root)
        self._lists[key] = (budget, entries)
        return entries

    def _build(self, subset: int, depth: int, budget: float, root: bool) -> list:
        out = []
        if root:
            self.root_progress = out

        def emit(entry):
            out.append(entry)
            self.total_count += 1
            if root:
                self.root_count += 1
                if self.root_count > self.cfg.max_trees:
                    raise _Truncated()
            if self.total_count > self.work_cap:
                raise _Truncated()

        errs, tie_labels = self.leaf_stats(subset)
        if self.cost(errs, 1) <= budget + _PRUNE_SLOP:
            for label in tie_labels:
                emit((errs, 1, Leaf(label)))
        if depth >= 1:
            for feature, ones in enumerate(self.feature_ones):
                sub1 = subset & ones
                if sub1 == 0 or sub1 == subset:
                    continue
                sub0 = subset ^ sub1
                best1 = self.best(sub1, depth - 1)
                if self.best(sub0, depth - 1) + best1 > budget + _PRUNE_SLOP:
                    continue
                for errs_l, leaves_l, node_l in self.enum(sub0, depth - 1, budget - best1):
                    cost_l = self.cost(errs_l, leaves_l)
                    if cost_l > budget - best1 + _PRUNE_SLOP:
                        break
                    for errs_r, leaves_r, node_r in self.enum(sub1, depth - 1, budget - cost_l):
                        if cost_l + self.cost(errs_r, leaves_r) > budget + _PRUNE_SLOP:
                            break
                        emit((errs_l + errs_r, leaves_l + leaves_r, Split(feature, node_l, node_r)))
        out.sort(key=lambda e: self.cost(e[0], e[1]))
        return out


def _mask(bools: np.ndarray) -> int:
    value = 0
    for i in np.flatnonzero(bools):
        value |= 1 << int(i)
    return value


def _finalize(entries, n_rows: int, cfg: EnumConfig, optimal_cost: float, truncated: bool) -> RashomonSet:
    """Filter to the membership rule, sort by (objective, canonical key), cap."""
    threshold = optimal_cost + cfg.epsilon + MEMBER_TOL
    members = []
    for errs, leaves, node in entries:
        obj = Objective.from_counts(errs, n_rows, leaves, cfg.lam)
        if obj.regularized <= threshold:
            tree = SparseTree(node)
            members.append((obj.regularized, tree.key, tree, obj))
    members.sort(key=lambda m: (m[0], m[1]))
    if len(members) > cfg.max_trees:
        members = members[: cfg.max_trees]
        truncated = True
    keys = {m[1] for m in members}
    if len(keys) != len(members):
        raise AssertionError("duplicate canonical keys in enumerated set")
    return RashomonSet(
        optimal_objective=members[0][3],
        trees=tuple(m[2] for m in members),
        objectives=tuple(m[3] for m in members),
        epsilon=cfg.epsilon,
        truncated=truncated,
    )


def enumerate_rashomon(data: BinaryDataset, rows, cfg: EnumConfig) -> RashomonSet:
    """Enumerate every tree within cfg.epsilon of the optimal objective.

    If max_trees stops generation early the truncated flag is set and the
    returned subset still contains an empirical risk minimizer.
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("rows must be nonempty")
    search = _Search(data, rows, cfg)
    optimal = search.best(search.universe, cfg.depth_cap)
    try:
        entries = search.enum(search.universe, cfg.depth_cap, optimal + cfg.epsilon, root=True)
        return _finalize(entries, search.n, cfg, optimal, truncated=False)
    except _Truncated:
        return _finalize_truncated(data, rows, cfg, search.root_progress, optimal)


def _finalize_truncated(data, rows, cfg, partial_entries, optimal_cost) -> RashomonSet:
    # Salvage what was generated, then guarantee an optimum is present by
    # enumerating the epsilon=0 set (small by construction).
    zero_cfg = EnumConfig(lam=cfg.lam, epsilon=0.0, depth_cap=cfg.depth_cap, max_trees=cfg.max_trees)
    search = _Search(data, np.asarray(rows, dtype=np.int64), zero_cfg)
    try:
        optima = search.enum(search.universe, cfg.depth_cap, optimal_cost, root=True)
    except _Truncated:
        raise ResourceLimitError(
            f"max_trees={cfg.max_trees} exhausted before the optimal set could be enumerated"
        ) from None
    merged = {}
    for errs, leaves, node in list(optima) + list(partial_entries):
        obj_cost = errs / search.n + cfg.lam * leaves
        if obj_cost <= optimal_cost + cfg.epsilon + MEMBER_TOL:
            merged.setdefault(SparseTree(node).key, (errs, leaves, node))
    result = _finalize(list(merged.values()), search.n, cfg, optimal_cost, truncated=True)
    return result


def find_optimal(data: BinaryDataset, rows, cfg: EnumConfig) -> tuple[SparseTree, Objective]:
    """The empirical risk minimizer; ties broken by smallest canonical key."""
    zero_cfg = EnumConfig(lam=cfg.lam, epsilon=0.0, depth_cap=cfg.depth_cap, max_trees=cfg.max_trees)
    rset = enumerate_rashomon(data, rows, zero_cfg)
    if rset.truncated:
        raise ResourceLimitError(
            f"max_trees={cfg.max_trees} exhausted before the optimum was provable"
        )
    return rset.trees[0], rset.objectives[0]


def brute_force_enumerate(data: BinaryDataset, rows, cfg: EnumConfig) -> RashomonSet:
    """Verification oracle: exhaustively generate every admissible tree and
    evaluate objectives directly by prediction.

    Guarded to n_features <= 8 and depth_cap <= 2 to stay tractable.
    """
    if data.n_features > 8 or cfg.depth_cap > 2:
        raise ValueError("brute force guard: requires n_features <= 8 and depth_cap <= 2")
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("rows must be nonempty")
    X = data.features[rows]
    y = data.labels[rows]

    def all_trees(idx: np.ndarray, depth: int) -> list[Node]:
        counts = np.bincount(y[idx], minlength=data.n_classes)
        top = counts.max()
        out: list[Node] = [Leaf(int(c)) for c in np.flatnonzero(counts == top)]
        if depth >= 1:
            for f in range(data.n_features):
                ones = X[idx, f] != 0
                idx0, idx1 = idx[~ones], idx[ones]
                if idx0.size == 0 or idx1.size == 0:
                    continue
                for node_l in all_trees(idx0, depth - 1):
                    for node_r in all_trees(idx1, depth - 1):
                        out.append(Split(f, node_l, node_r))
        return out

    scored = []
    for node in all_trees(np.arange(rows.size), cfg.depth_cap):
        tree = SparseTree(node)
        obj = objective(tree, data, rows, cfg.lam)
        scored.append((obj.regularized, tree.key, tree, obj))
    optimal_cost = min(s[0] for s in scored)
    threshold = optimal_cost + cfg.epsilon + MEMBER_TOL
    members = sorted((s for s in scored if s[0] <= threshold), key=lambda s: (s[0], s[1]))
    truncated = len(members) > cfg.max_trees
    if truncated:
        members = members[: cfg.max_trees]
    return RashomonSet(
        optimal_objective=members[0][3],
        trees=tuple(m[2] for m in members),
        objectives=tuple(m[3] for m in members),
        epsilon=cfg.epsilon,
        truncated=truncated,
    )
