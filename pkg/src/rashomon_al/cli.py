"""Command-line interface.

Subcommands: run, enumerate, sweep-threshold, stats, emit-plotdata,
make-data.  Errors exit nonzero after printing one machine-readable JSON
line on stderr.  RASHOMON_AL_OUT sets the default output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import sweep_threshold, wilcoxon_signed_rank
from .dataset import load_csv, split, write_csv
from .datasets import GENERATORS
from .enumerator import EnumConfig, enumerate_rashomon
from .experiment import RunConfig, _scan_results, default_output_dir, emit_plotdata, run_experiment


def _add_protocol_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=0.01, help="per-leaf penalty (default 0.01)")
    parser.add_argument("--depth-cap", type=int, default=3, help="max tree depth in edges (default 3)")
    parser.add_argument("--max-trees", type=int, default=200_000, help="enumeration safety cap")
    parser.add_argument("--test-frac", type=float, default=0.2)
    parser.add_argument("--init-train-frac", type=float, default=0.2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rashomon-al", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an active-learning experiment with replications")
    p_run.add_argument("--dataset", required=True)
    p_run.add_argument("--strategy", required=True, choices=("unreal", "dureal", "rf_qbc", "passive"))
    p_run.add_argument("--epsilon", type=float, required=True, help="Rashomon threshold")
    _add_protocol_flags(p_run)
    p_run.add_argument("--budget", type=int, default=None, help="queries per replication (default: exhaust the pool)")
    p_run.add_argument("--replications", type=int, default=1)
    p_run.add_argument("--base-seed", type=int, default=0)
    p_run.add_argument("--noise-flip-prob", type=float, default=0.0)
    p_run.add_argument("--subsample", type=int, default=None, help="uniformly subsample the dataset to this many rows")
    p_run.add_argument("--eval-model", default="rashomon_all", choices=("rashomon_all", "rashomon_unique", "forest"))
    p_run.add_argument("--forest-trees", type=int, default=100)
    p_run.add_argument("--forest-depth", type=int, default=8)
    p_run.add_argument("--jobs", type=int, default=1, help="concurrent replications")
    p_run.add_argument("--dataset-name", default="", help="label used in plot data (default: file stem)")
    p_run.add_argument("--out", default=None, help="output directory (default: $RASHOMON_AL_OUT/<dataset>-<strategy>)")

    p_enum = sub.add_parser("enumerate", help="enumerate the Rashomon set on a whole dataset")
    p_enum.add_argument("--dataset", required=True)
    p_enum.add_argument("--epsilon", type=float, required=True)
    p_enum.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p_enum.add_argument("--depth-cap", type=int, default=3)
    p_enum.add_argument("--max-trees", type=int, default=200_000)
    p_enum.add_argument("--show-trees", type=int, default=0, help="print the first N trees")

    p_sweep = sub.add_parser("sweep-threshold", help="trade-off curve of test error against epsilon")
    p_sweep.add_argument("--dataset", required=True)
    p_sweep.add_argument("--epsilon-grid", required=True, help="comma-separated ascending thresholds")
    _add_protocol_flags(p_sweep)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--slack", type=float, default=0.0, help="added to the argmin epsilon in the recommendation")
    p_sweep.add_argument("--out", default=None, help="directory for sweep.csv (default: $RASHOMON_AL_OUT/sweep)")

    p_stats = sub.add_parser("stats", help="pairwise signed-rank p-values between strategies")
    p_stats.add_argument("--results", required=True, help="directory holding run outputs")
    p_stats.add_argument("--metric", default="test_error", choices=("test_error", "test_f1"))

    p_emit = sub.add_parser("emit-plotdata", help="tidy plot-ready CSVs from run outputs")
    p_emit.add_argument("--results", required=True)
    p_emit.add_argument("--out", default=None, help="output directory (default: <results>/plotdata)")

    p_data = sub.add_parser("make-data", help="write the bundled benchmark-shaped datasets as CSV")
    p_data.add_argument("--out", required=True)
    p_data.add_argument("--only", nargs="*", choices=sorted(GENERATORS), help="subset of datasets")
    return parser


def _cmd_run(args) -> int:
    out = args.out or str(Path(default_output_dir()) / f"{Path(args.dataset).stem}-{args.strategy}")
    cfg = RunConfig(
        dataset=args.dataset,
        strategy=args.strategy,
        epsilon=args.epsilon,
        lam=args.lam,
        depth_cap=args.depth_cap,
        budget=args.budget,
        n_replications=args.replications,
        base_seed=args.base_seed,
        test_frac=args.test_frac,
        init_train_frac=args.init_train_frac,
        noise_flip_prob=args.noise_flip_prob,
        output_dir=out,
        max_trees=args.max_trees,
        eval_model=args.eval_model,
        forest_trees=args.forest_trees,
        forest_depth=args.forest_depth,
        subsample=args.subsample,
        jobs=args.jobs,
        dataset_name=args.dataset_name,
    )
    path = run_experiment(cfg)
    summary = json.loads((path / "summary.json").read_text())
    done = len(summary["replications"])
    failed = len(summary["failures"])
    print(f"wrote {path}/results.csv ({done} replications complete, {failed} failed)")
    return 1 if done == 0 else 0


def _cmd_enumerate(args) -> int:
    data = load_csv(args.dataset)
    cfg = EnumConfig(lam=args.lam, epsilon=args.epsilon, depth_cap=args.depth_cap, max_trees=args.max_trees)
    rset = enumerate_rashomon(data, np.arange(data.n_rows), cfg)
    print(f"optimal objective: {rset.optimal_objective.regularized:.6f} "
          f"({rset.optimal_objective.misclass_count} errors, {rset.optimal_objective.n_leaves} leaves)")
    print(f"rashomon set size: {rset.n_trees} (epsilon={args.epsilon}, truncated={rset.truncated})")
    for tree, obj in list(zip(rset.trees, rset.objectives))[: args.show_trees]:
        print(f"  {obj.regularized:.6f}  {tree.to_text()}")
    return 0


def _cmd_sweep(args) -> int:
    data = load_csv(args.dataset)
    grid = [float(tok) for tok in args.epsilon_grid.split(",") if tok.strip()]
    indices = split(data, args.test_frac, args.init_train_frac, args.seed)
    rows, best = sweep_threshold(data, indices, args.lam, grid, depth_cap=args.depth_cap, max_trees=args.max_trees)
    out = Path(args.out or (Path(default_output_dir()) / "sweep"))
    out.mkdir(parents=True, exist_ok=True)
    sweep_path = out / "sweep.csv"
    with open(sweep_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "epsilon", "n_trees", "n_unique_patterns", "ensemble_test_error", "mean_member_accuracy", "truncated_flag"])
        for row in rows:
            writer.writerow([Path(args.dataset).stem, repr(row.epsilon), row.n_trees, row.n_unique_patterns,
                             repr(row.ensemble_test_error), repr(row.mean_member_accuracy), int(row.truncated)])
    print(f"wrote {sweep_path}")
    print(f"argmin-error epsilon: {best}; recommended (with slack {args.slack}): {best + args.slack}")
    return 0


def _cmd_stats(args) -> int:
    curves: dict[str, dict[str, dict[int, list[float]]]] = {}
    for config, rows in _scan_results(Path(args.results)):
        dataset, strategy = config["dataset_name"], config["strategy"]
        per_iter = curves.setdefault(dataset, {}).setdefault(strategy, {})
        for row in rows:
            per_iter.setdefault(int(row["iteration"]), []).append(float(row[args.metric]))
    for dataset in sorted(curves):
        strategies = sorted(curves[dataset])
        means = {
            s: np.array([np.mean(v) for _, v in sorted(curves[dataset][s].items())]) for s in strategies
        }
        print(f"\n{dataset}: pairwise two-sided signed-rank p-values on per-iteration mean {args.metric}")
        width = max(len(s) for s in strategies) + 2
        print(" " * width + "".join(s.ljust(width) for s in strategies))
        for a in strategies:
            cells = []
            for b in strategies:
                if means[a].shape != means[b].shape:
                    cells.append("n/a".ljust(width))
                    continue
                p = wilcoxon_signed_rank(means[a], means[b])
                cells.append(f"{p:.5f}".ljust(width))
            print(a.ljust(width) + "".join(cells))
    return 0


def _cmd_emit(args) -> int:
    out = args.out or str(Path(args.results) / "plotdata")
    emitted = emit_plotdata(args.results, out)
    for kind, path in sorted(emitted.items()):
        print(f"wrote {path} ({kind})")
    return 0


def _cmd_make_data(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = args.only or sorted(GENERATORS)
    for name in names:
        try:
            data = GENERATORS[name]()
        except ImportError as exc:
            print(f"skipping {name}: {exc}", file=sys.stderr)
            continue
        path = out / f"{name}.csv"
        write_csv(data, path)
        print(f"wrote {path} ({data.n_rows} rows, {data.n_features} features, {data.n_classes} classes)")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "enumerate": _cmd_enumerate,
    "sweep-threshold": _cmd_sweep,
    "stats": _cmd_stats,
    "emit-plotdata": _cmd_emit,
    "make-data": _cmd_make_data,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI contract
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
