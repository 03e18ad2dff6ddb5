"""Rashomon-set enumeration for sparse decision trees, with query-by-committee
active learning on top of it."""

__version__ = "0.1.0"

from .dataset import BinaryDataset, SplitIndices, inject_label_noise, load_csv, split, write_csv
from .tree import Objective, SparseTree, canonicalize, objective
from .enumerator import EnumConfig, RashomonSet, brute_force_enumerate, enumerate_rashomon, find_optimal
from .patterns import ClassificationPattern, compute_pattern, group_patterns, unique_representatives
from .committee import Committee, ensemble_predict, vote_counts, vote_entropy
from .forest import ForestConfig, greedy_tree, train_forest
from .active_loop import ALState, QueryRecord, run, step_dureal, step_passive, step_rf_qbc, step_unreal
from .analysis import SweepRow, f1_score, relative_error_curves, sweep_threshold, wilcoxon_signed_rank
from .experiment import RunConfig, emit_plotdata, run_experiment

__all__ = [
    "BinaryDataset", "SplitIndices", "load_csv", "write_csv", "split", "inject_label_noise",
    "SparseTree", "Objective", "objective", "canonicalize",
    "EnumConfig", "RashomonSet", "enumerate_rashomon", "brute_force_enumerate", "find_optimal",
    "ClassificationPattern", "compute_pattern", "group_patterns", "unique_representatives",
    "Committee", "vote_counts", "vote_entropy", "ensemble_predict",
    "ForestConfig", "greedy_tree", "train_forest",
    "ALState", "QueryRecord", "run", "step_unreal", "step_dureal", "step_rf_qbc", "step_passive",
    "f1_score", "SweepRow", "sweep_threshold", "wilcoxon_signed_rank", "relative_error_curves",
    "RunConfig", "run_experiment", "emit_plotdata",
]
