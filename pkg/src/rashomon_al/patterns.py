"""Grouping Rashomon trees by identical predictions on a reference set.

Two trees belong to the same classification pattern when every prediction
they make on the reference rows agrees.  One representative per pattern
(the sparsest member) forms the deduplicated committee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .enumerator import RashomonSet
from .tree import SparseTree, predict_matrix


@dataclass(frozen=True)
class ClassificationPattern:
    """One equivalence class of trees sharing a prediction vector.

    member_tree_ids index into the RashomonSet that was grouped;
    representative_id is the member with the fewest leaves (ties broken by
    smallest canonical key).
    """

    predictions: tuple[int, ...]
    member_tree_ids: tuple[int, ...]
    representative_id: int

    @property
    def multiplicity(self) -> int:
        return len(self.member_tree_ids)


def compute_pattern(tree: SparseTree, reference_rows: np.ndarray) -> np.ndarray:
    """Prediction vector of one tree over the reference rows."""
    reference_rows = np.asarray(reference_rows)
    if reference_rows.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return tree.predict_rows(reference_rows)


def group_patterns(rset: RashomonSet, reference_rows: np.ndarray) -> list[ClassificationPattern]:
    """Partition a Rashomon set by prediction-vector equality on the reference rows.

    Groups are ordered by their best member objective (ties by smallest
    member index, which is deterministic because the set itself is sorted).
    """
    if rset.n_trees == 0:
        raise ValueError("Rashomon set must be nonempty")
    reference_rows = np.asarray(reference_rows)
    if reference_rows.shape[0] == 0:
        matrix = np.empty((rset.n_trees, 0), dtype=np.int64)
    else:
        matrix = predict_matrix(rset.trees, reference_rows)
    by_vector: dict[bytes, list[int]] = {}
    vectors: dict[bytes, tuple[int, ...]] = {}
    for i in range(rset.n_trees):
        key = matrix[i].tobytes()
        by_vector.setdefault(key, []).append(i)
        if key not in vectors:
            vectors[key] = tuple(int(v) for v in matrix[i])
    groups = []
    for key, ids in by_vector.items():
        rep = min(ids, key=lambda i: (rset.trees[i].n_leaves, rset.trees[i].key))
        best = min(rset.objectives[i].regularized for i in ids)
        groups.append((best, min(ids), ClassificationPattern(vectors[key], tuple(ids), rep)))
    groups.sort(key=lambda g: (g[0], g[1]))
    return [g[2] for g in groups]


def unique_representatives(groups: list[ClassificationPattern], rset: RashomonSet) -> list[SparseTree]:
    """One tree per pattern, in group order."""
    return [rset.trees[g.representative_id] for g in groups]
