"""Pool-based active learning: Rashomon-committee, forest, and passive selectors.

One step = one pass of the query loop.  The committee that scores the
candidate pool is always trained on the rows labeled so far; after the
chosen row is moved into the training set the model is refit and the
emitted record carries the refit model's test metrics together with the
query that produced them.  Record 0 is the pre-query baseline, so a run
with budget B emits B+1 records and record n reflects a training set of
initial_size + n rows.

Information hygiene: selectors only ever see the candidate rows' feature
matrix.  A candidate's label is read exactly once, by the oracle, after the
row has been chosen.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .committee import Committee, predict_rows, score_rows
from .dataset import BinaryDataset, SplitIndices
from .enumerator import EnumConfig, RashomonSet, enumerate_rashomon
from .errors import ConfigError
from .forest import ForestConfig, train_forest
from .analysis import f1_score
from .patterns import group_patterns, unique_representatives

STRATEGIES = ("unreal", "dureal", "rf_qbc", "passive")
EVAL_MODELS = ("rashomon_all", "rashomon_unique", "forest")


@dataclass(frozen=True)
class QueryRecord:
    """Bookkeeping for one pass of the loop (iteration 0 = baseline)."""

    iteration: int
    chosen_row: int | None
    selector_score: float | None
    test_f1: float
    test_error: float
    n_trees: int | None
    n_unique_patterns: int | None
    truncated: bool
    wall_ms: float


@dataclass(frozen=True, eq=False)
class ALState:
    """Disjoint train/candidate/test index sets plus query history."""

    train: np.ndarray
    candidate: np.ndarray
    test: np.ndarray
    iteration: int = 0
    history: tuple[QueryRecord, ...] = ()
    model: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("train", "candidate", "test"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_split(cls, split: SplitIndices) -> "ALState":
        return cls(train=split.train, candidate=split.candidate, test=split.test)


class RashomonModel:
    """Rashomon set fitted on one training set, with pattern grouping cached
    per candidate pool."""

    def __init__(self, data: BinaryDataset, train: np.ndarray, cfg: EnumConfig):
        self.data = data
        self.cfg = cfg
        self.rset: RashomonSet = enumerate_rashomon(data, train, cfg)
        self._group_key: bytes | None = None
        self._groups = None

    def groups_for(self, candidate: np.ndarray):
        key = np.asarray(candidate, dtype=np.int64).tobytes()
        if key != self._group_key:
            self._groups = group_patterns(self.rset, self.data.features[candidate])
            self._group_key = key
        return self._groups

    def committee(self, candidate: np.ndarray, weighted: bool) -> Committee:
        groups = self.groups_for(candidate)
        reps = unique_representatives(groups, self.rset)
        if weighted:
            return Committee(tuple(reps), np.array([g.multiplicity for g in groups], dtype=np.float64))
        return Committee(tuple(reps))

    def all_trees_committee(self) -> Committee:
        return Committee(self.rset.trees)

    def test_metrics(self, test: np.ndarray, eval_model: str, candidate: np.ndarray):
        if eval_model == "rashomon_unique":
            committee = self.committee(candidate, weighted=False)
        else:
            committee = self.all_trees_committee()
        predicted = predict_rows(committee, self.data.features[test], self.data.n_classes)
        actual = self.data.labels[test]
        return f1_score(predicted, actual, self.data.n_classes), float(np.mean(predicted != actual))

    def counts(self, candidate: np.ndarray) -> tuple[int, int]:
        return self.rset.n_trees, len(self.groups_for(candidate))


class ForestModel:
    def __init__(self, data: BinaryDataset, train: np.ndarray, cfg: ForestConfig, seed: int):
        self.data = data
        self.committee = train_forest(data, train, replace(cfg, seed=seed))

    def test_metrics(self, test: np.ndarray):
        predicted = predict_rows(self.committee, self.data.features[test], self.data.n_classes)
        actual = self.data.labels[test]
        return f1_score(predicted, actual, self.data.n_classes), float(np.mean(predicted != actual))


def _argmax_first(scores: np.ndarray) -> int:
    # candidate arrays are kept sorted, so first argmax = smallest row index
    return int(np.argmax(scores))


def _move_row(state: ALState, chosen_row: int) -> ALState:
    pos = int(np.searchsorted(state.candidate, chosen_row))
    if pos >= state.candidate.size or state.candidate[pos] != chosen_row:
        raise ValueError(f"chosen row {chosen_row} is not in the candidate pool")
    return replace(
        state,
        train=np.sort(np.append(state.train, chosen_row)),
        candidate=np.delete(state.candidate, pos),
        iteration=state.iteration + 1,
    )


def _rashomon_step(
    state: ALState, data: BinaryDataset, cfg: EnumConfig, weighted: bool, eval_model: str
) -> tuple[ALState, QueryRecord]:
    if state.candidate.size == 0:
        raise ValueError("candidate pool is empty")
    if cfg is None:
        raise ConfigError("Rashomon strategies need an EnumConfig")
    start = time.perf_counter()
    model: RashomonModel = state.model if isinstance(state.model, RashomonModel) else RashomonModel(data, state.train, cfg)
    committee = model.committee(state.candidate, weighted=weighted)
    scores = score_rows(committee, data.features[state.candidate], data.n_classes)
    pick = _argmax_first(scores)
    chosen = int(state.candidate[pick])
    new_state = _move_row(state, chosen)
    new_model = RashomonModel(data, new_state.train, cfg)
    f1, error = new_model.test_metrics(new_state.test, eval_model, new_state.candidate)
    n_trees, n_unique = new_model.counts(new_state.candidate)
    record = QueryRecord(
        iteration=new_state.iteration,
        chosen_row=chosen,
        selector_score=float(scores[pick]),
        test_f1=f1,
        test_error=error,
        n_trees=n_trees,
        n_unique_patterns=n_unique,
        truncated=model.rset.truncated or new_model.rset.truncated,
        wall_ms=(time.perf_counter() - start) * 1000.0,
    )
    new_state = replace(new_state, history=state.history + (record,), model=new_model)
    return new_state, record


def step_unreal(state: ALState, data: BinaryDataset, cfg: EnumConfig, eval_model: str = "rashomon_all"):
    """One query chosen by vote entropy over the unweighted unique-pattern committee."""
    return _rashomon_step(state, data, cfg, weighted=False, eval_model=eval_model)


def step_dureal(state: ALState, data: BinaryDataset, cfg: EnumConfig, eval_model: str = "rashomon_all"):
    """As step_unreal but pattern representatives vote with their multiplicities
    (prediction-equivalent to one vote per Rashomon tree)."""
    return _rashomon_step(state, data, cfg, weighted=True, eval_model=eval_model)


def step_rf_qbc(state: ALState, data: BinaryDataset, forest_cfg: ForestConfig):
    """One query chosen by vote entropy over a bagged-forest committee."""
    if state.candidate.size == 0:
        raise ValueError("candidate pool is empty")
    start = time.perf_counter()
    model: ForestModel = (
        state.model
        if isinstance(state.model, ForestModel)
        else ForestModel(data, state.train, forest_cfg, _derived_seed(forest_cfg.seed, state.iteration))
    )
    scores = score_rows(model.committee, data.features[state.candidate], data.n_classes)
    pick = _argmax_first(scores)
    chosen = int(state.candidate[pick])
    new_state = _move_row(state, chosen)
    new_model = ForestModel(data, new_state.train, forest_cfg, _derived_seed(forest_cfg.seed, new_state.iteration))
    f1, error = new_model.test_metrics(new_state.test)
    record = QueryRecord(
        iteration=new_state.iteration,
        chosen_row=chosen,
        selector_score=float(scores[pick]),
        test_f1=f1,
        test_error=error,
        n_trees=None,
        n_unique_patterns=None,
        truncated=False,
        wall_ms=(time.perf_counter() - start) * 1000.0,
    )
    new_state = replace(new_state, history=state.history + (record,), model=new_model)
    return new_state, record


def step_passive(
    state: ALState,
    data: BinaryDataset,
    cfg: EnumConfig | None = None,
    seed: int = 0,
    eval_model: str = "rashomon_all",
    forest_cfg: ForestConfig | None = None,
):
    """One uniformly random query; the evaluation model is configurable and
    defaults to the same Rashomon ensemble UNREAL reports metrics with."""
    if state.candidate.size == 0:
        raise ValueError("candidate pool is empty")
    start = time.perf_counter()
    rng = np.random.default_rng((seed, state.iteration))
    chosen = int(rng.choice(state.candidate))
    new_state = _move_row(state, chosen)
    if eval_model == "forest":
        forest_cfg = forest_cfg or ForestConfig()
        model: object = ForestModel(data, new_state.train, forest_cfg, _derived_seed(forest_cfg.seed, new_state.iteration))
        f1, error = model.test_metrics(new_state.test)
        n_trees = n_unique = None
        truncated = False
    else:
        if cfg is None:
            raise ConfigError("passive with a Rashomon evaluator needs an EnumConfig")
        model = RashomonModel(data, new_state.train, cfg)
        f1, error = model.test_metrics(new_state.test, eval_model, new_state.candidate)
        n_trees, n_unique = model.counts(new_state.candidate)
        truncated = model.rset.truncated
    record = QueryRecord(
        iteration=new_state.iteration,
        chosen_row=chosen,
        selector_score=None,
        test_f1=f1,
        test_error=error,
        n_trees=n_trees,
        n_unique_patterns=n_unique,
        truncated=truncated,
        wall_ms=(time.perf_counter() - start) * 1000.0,
    )
    new_state = replace(new_state, history=state.history + (record,), model=model)
    return new_state, record


def _derived_seed(base: int, iteration: int) -> int:
    return int(np.random.SeedSequence((base, iteration)).generate_state(1)[0])


def _baseline_record(state: ALState, data: BinaryDataset, strategy: str, cfg, forest_cfg, eval_model: str):
    start = time.perf_counter()
    if strategy == "rf_qbc" or (strategy == "passive" and eval_model == "forest"):
        forest_cfg = forest_cfg or ForestConfig()
        model: object = ForestModel(data, state.train, forest_cfg, _derived_seed(forest_cfg.seed, 0))
        f1, error = model.test_metrics(state.test)
        n_trees = n_unique = None
        truncated = False
    else:
        model = RashomonModel(data, state.train, cfg)
        f1, error = model.test_metrics(state.test, eval_model, state.candidate)
        n_trees, n_unique = model.counts(state.candidate)
        truncated = model.rset.truncated
    record = QueryRecord(
        iteration=0,
        chosen_row=None,
        selector_score=None,
        test_f1=f1,
        test_error=error,
        n_trees=n_trees,
        n_unique_patterns=n_unique,
        truncated=truncated,
        wall_ms=(time.perf_counter() - start) * 1000.0,
    )
    return replace(state, history=(record,), model=model), record


def run(
    strategy: str,
    data: BinaryDataset,
    split: SplitIndices,
    budget: int,
    cfg: EnumConfig | None = None,
    forest_cfg: ForestConfig | None = None,
    seed: int = 0,
    eval_model: str = "rashomon_all",
) -> list[QueryRecord]:
    """Run one active learning episode; returns budget+1 records."""
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if eval_model not in EVAL_MODELS:
        raise ConfigError(f"unknown eval_model {eval_model!r}; expected one of {EVAL_MODELS}")
    state = ALState.from_split(split)
    if budget > state.candidate.size:
        raise ConfigError(f"budget {budget} exceeds candidate pool size {state.candidate.size}")
    if strategy in ("unreal", "dureal", "passive") and eval_model != "forest" and cfg is None:
        raise ConfigError(f"strategy {strategy!r} needs an EnumConfig")
    state, baseline = _baseline_record(state, data, strategy, cfg, forest_cfg, eval_model)
    records = [baseline]
    for _ in range(budget):
        if strategy == "unreal":
            state, record = step_unreal(state, data, cfg, eval_model)
        elif strategy == "dureal":
            state, record = step_dureal(state, data, cfg, eval_model)
        elif strategy == "rf_qbc":
            state, record = step_rf_qbc(state, data, forest_cfg or ForestConfig())
        else:
            state, record = step_passive(state, data, cfg, seed, eval_model, forest_cfg)
        records.append(record)
    return records
