"""Experiment orchestration: replications, persistence, and plot-data emission.

A run writes three artifacts into its output directory:
  results.csv   one row per (replication, iteration), fixed column set
  summary.json  per-replication end-state plus any recorded failures
  manifest.json full configuration and code version

Re-running with the same configuration is idempotent; a differing
configuration against an existing manifest is refused.  The wall_ms column
is the only timing field and is excluded from determinism comparisons.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .active_loop import EVAL_MODELS, STRATEGIES, QueryRecord, run
from .analysis import relative_error_curves
from .dataset import inject_label_noise, load_csv, split, subsample_rows
from .enumerator import EnumConfig
from .errors import ConfigError, ValidationError
from .forest import ForestConfig

RESULT_COLUMNS = [
    "replication",
    "seed",
    "iteration",
    "strategy",
    "train_size",
    "chosen_row",
    "selector_score",
    "test_f1",
    "test_error",
    "n_trees",
    "n_unique_patterns",
    "truncated_flag",
    "wall_ms",
]


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    strategy: str
    epsilon: float
    lam: float = 0.01
    depth_cap: int = 3
    budget: int | None = None  # None = exhaust the candidate pool
    n_replications: int = 1
    base_seed: int = 0
    test_frac: float = 0.2
    init_train_frac: float = 0.2
    noise_flip_prob: float = 0.0
    output_dir: str = ""
    max_trees: int = 200_000
    eval_model: str = "rashomon_all"
    forest_trees: int = 100
    forest_depth: int = 8
    subsample: int | None = None
    jobs: int = 1
    dataset_name: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.eval_model not in EVAL_MODELS:
            raise ConfigError(f"unknown eval_model {self.eval_model!r}; expected one of {EVAL_MODELS}")
        if self.n_replications < 1:
            raise ConfigError("n_replications must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not self.output_dir:
            raise ConfigError("output_dir is required")
        if not self.dataset_name:
            object.__setattr__(self, "dataset_name", Path(self.dataset).stem)

    def enum_config(self) -> EnumConfig:
        return EnumConfig(lam=self.lam, epsilon=self.epsilon, depth_cap=self.depth_cap, max_trees=self.max_trees)

    def forest_config(self, seed: int) -> ForestConfig:
        return ForestConfig(n_trees=self.forest_trees, max_depth=self.forest_depth, seed=seed)


def _noise_seed(rep_seed: int) -> int:
    return int(np.random.SeedSequence((rep_seed, 101)).generate_state(1)[0])


def _run_replication(cfg: RunConfig, rep: int) -> tuple[int, int, list[QueryRecord], int]:
    """(replication, seed, records, initial train size) for one replication."""
    rep_seed = cfg.base_seed + rep
    data = load_csv(cfg.dataset)
    if cfg.subsample is not None:
        data = subsample_rows(data, cfg.subsample, rep_seed)
    if cfg.noise_flip_prob > 0:
        data = inject_label_noise(data, cfg.noise_flip_prob, _noise_seed(rep_seed))
    indices = split(data, cfg.test_frac, cfg.init_train_frac, rep_seed)
    budget = indices.candidate.size if cfg.budget is None else cfg.budget
    records = run(
        cfg.strategy,
        data,
        indices,
        budget,
        cfg=cfg.enum_config(),
        forest_cfg=cfg.forest_config(rep_seed),
        seed=rep_seed,
        eval_model=cfg.eval_model,
    )
    return rep, rep_seed, records, int(indices.train.size)


def run_experiment(cfg: RunConfig) -> Path:
    """Execute all replications and persist results; returns the output dir.

    Replication failures are recorded with their seeds in summary.json and
    do not abort the remaining replications.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"tool": "rashomon-al", "version": __version__, "config": asdict(cfg)}
    manifest_path = out / "manifest.json"
    if manifest_path.exists():
        existing = json.loads(manifest_path.read_text())
        if existing != manifest:
            raise ConfigError(
                f"output dir {out} already holds results for a different configuration "
                "(manifest mismatch); choose another directory"
            )
    results: dict[int, tuple[int, list[QueryRecord], int]] = {}
    failures = []
    if cfg.jobs == 1 or cfg.n_replications == 1:
        for rep in range(cfg.n_replications):
            try:
                _, seed, records, train0 = _run_replication(cfg, rep)
                results[rep] = (seed, records, train0)
            except Exception as exc:  # noqa: BLE001 - replication isolation is the contract
                failures.append({"replication": rep, "seed": cfg.base_seed + rep, "error": f"{type(exc).__name__}: {exc}"})
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = {pool.submit(_run_replication, cfg, rep): rep for rep in range(cfg.n_replications)}
            for future in concurrent.futures.as_completed(futures):
                rep = futures[future]
                try:
                    _, seed, records, train0 = future.result()
                    results[rep] = (seed, records, train0)
                except Exception as exc:  # noqa: BLE001
                    failures.append({"replication": rep, "seed": cfg.base_seed + rep, "error": f"{type(exc).__name__}: {exc}"})
    _write_results(out, cfg, results)
    _write_summary(out, cfg, results, failures)
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_results(out: Path, cfg: RunConfig, results) -> None:
    with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for rep in sorted(results):
            seed, records, train0 = results[rep]
            for rec in records:
                writer.writerow(
                    [
                        rep,
                        seed,
                        rec.iteration,
                        cfg.strategy,
                        train0 + rec.iteration,
                        _fmt(rec.chosen_row),
                        _fmt(rec.selector_score),
                        _fmt(rec.test_f1),
                        _fmt(rec.test_error),
                        _fmt(rec.n_trees),
                        _fmt(rec.n_unique_patterns),
                        int(rec.truncated),
                        _fmt(round(rec.wall_ms, 3)),
                    ]
                )


def _write_summary(out: Path, cfg: RunConfig, results, failures) -> None:
    reps = []
    for rep in sorted(results):
        seed, records, train0 = results[rep]
        final = records[-1]
        reps.append(
            {
                "replication": rep,
                "seed": seed,
                "initial_train_size": train0,
                "n_records": len(records),
                "final_f1": final.test_f1,
                "final_error": final.test_error,
                "total_wall_ms": round(sum(r.wall_ms for r in records), 3),
            }
        )
    summary = {"strategy": cfg.strategy, "dataset": cfg.dataset_name, "replications": reps, "failures": failures}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# plot-data emission


def _scan_results(results_dir: Path):
    """Yield (manifest config dict, list of row dicts) for every run under results_dir."""
    found = False
    for manifest_path in sorted(results_dir.rglob("manifest.json")):
        results_path = manifest_path.parent / "results.csv"
        if not results_path.exists():
            continue
        found = True
        config = json.loads(manifest_path.read_text())["config"]
        with open(results_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        yield config, rows
    if not found:
        raise ValidationError(f"no manifest.json/results.csv pairs under {results_dir}")


def emit_plotdata(results_dir, out_dir) -> dict[str, Path]:
    """Convert raw results into tidy plot-ready CSVs.

    Emits learning_curves.csv always, counts.csv when Rashomon-set sizes are
    present, relative_curves.csv per available baseline, and
    threshold_curve.csv when sweep output is found.  Missing strategies only
    narrow the emission and are reported on stderr.
    """
    results_dir, out_dir = Path(results_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    emitted: dict[str, Path] = {}

    by_key: dict[tuple[str, str], dict[int, list[dict]]] = {}
    seen_keys = set()
    for config, rows in _scan_results(results_dir):
        dataset, strategy = config["dataset_name"], config["strategy"]
        for row in rows:
            pk = (dataset, strategy, row["seed"], row["iteration"])
            if pk in seen_keys:
                raise ValidationError(f"duplicate results row for {pk}")
            seen_keys.add(pk)
            by_key.setdefault((dataset, strategy), {}).setdefault(int(row["replication"]), []).append(row)

    curve_path = out_dir / "learning_curves.csv"
    with open(curve_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "strategy", "iteration", "n_replications", "mean_f1", "se_f1", "mean_error", "se_error"])
        for (dataset, strategy), reps in sorted(by_key.items()):
            for iteration, f1s, errors in _iteration_stats(reps):
                writer.writerow(
                    [dataset, strategy, iteration, len(f1s), _fmt(_mean(f1s)), _fmt(_se(f1s)), _fmt(_mean(errors)), _fmt(_se(errors))]
                )
    emitted["learning_curves"] = curve_path

    counts_rows = []
    for (dataset, strategy), reps in sorted(by_key.items()):
        for rep, rows in sorted(reps.items()):
            for row in rows:
                if row["n_trees"]:
                    n_trees, n_unique = int(row["n_trees"]), int(row["n_unique_patterns"])
                    counts_rows.append(
                        [dataset, strategy, rep, int(row["iteration"]), n_trees, n_unique,
                         _fmt(math.log(n_trees)), _fmt(math.log(n_unique))]
                    )
    if counts_rows:
        counts_path = out_dir / "counts.csv"
        with open(counts_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "strategy", "replication", "iteration", "n_trees", "n_unique_patterns", "log_n_trees", "log_n_unique"])
            writer.writerows(counts_rows)
        emitted["counts"] = counts_path

    relative_rows = []
    datasets = {k[0] for k in by_key}
    for dataset in sorted(datasets):
        strategies = {k[1] for k in by_key if k[0] == dataset}
        for baseline in ("rf_qbc", "passive"):
            if baseline not in strategies:
                print(f"emit-plotdata: dataset {dataset!r}: baseline {baseline!r} absent, skipping its relative curves", file=sys.stderr)
                continue
            errors = {}
            grids = {}
            for strategy in sorted(strategies):
                matrix = _error_matrix(by_key[(dataset, strategy)])
                errors[strategy] = matrix
                grids[strategy] = matrix.shape
            base_shape = grids[baseline]
            comparable = {s: e for s, e in errors.items() if e.shape == base_shape}
            skipped = sorted(set(errors) - set(comparable))
            if skipped:
                print(f"emit-plotdata: dataset {dataset!r}: grids differ from {baseline!r} for {skipped}, skipped", file=sys.stderr)
            deltas = relative_error_curves(comparable, baseline)
            for strategy, (mean, se) in sorted(deltas.items()):
                for iteration, (m, s) in enumerate(zip(mean, se)):
                    relative_rows.append([dataset, strategy, baseline, iteration, _fmt(float(m)), _fmt(float(s))])
    if relative_rows:
        rel_path = out_dir / "relative_curves.csv"
        with open(rel_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "strategy", "baseline", "iteration", "delta_error_mean", "delta_error_se"])
            writer.writerows(relative_rows)
        emitted["relative_curves"] = rel_path

    sweep_rows = []
    for sweep_path in sorted(results_dir.rglob("sweep.csv")):
        with open(sweep_path, newline="", encoding="utf-8") as fh:
            sweep_rows.extend(list(csv.DictReader(fh)))
    if sweep_rows:
        threshold_path = out_dir / "threshold_curve.csv"
        with open(threshold_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(sweep_rows[0].keys()))
            writer.writeheader()
            writer.writerows(sweep_rows)
        emitted["threshold_curve"] = threshold_path
    return emitted


def _iteration_stats(reps: dict[int, list[dict]]):
    by_iteration: dict[int, tuple[list[float], list[float]]] = {}
    for rows in reps.values():
        for row in rows:
            slot = by_iteration.setdefault(int(row["iteration"]), ([], []))
            slot[0].append(float(row["test_f1"]))
            slot[1].append(float(row["test_error"]))
    for iteration in sorted(by_iteration):
        f1s, errors = by_iteration[iteration]
        yield iteration, f1s, errors


def _error_matrix(reps: dict[int, list[dict]]) -> np.ndarray:
    matrix = []
    for rep in sorted(reps):
        rows = sorted(reps[rep], key=lambda r: int(r["iteration"]))
        matrix.append([float(r["test_error"]) for r in rows])
    lengths = {len(r) for r in matrix}
    if len(lengths) != 1:
        raise ValidationError("replications disagree on iteration grid")
    return np.array(matrix, dtype=np.float64)


def _mean(values) -> float:
    return float(np.mean(values))


def _se(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def default_output_dir() -> str:
    return os.environ.get("RASHOMON_AL_OUT", "runs")
