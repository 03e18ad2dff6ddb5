import csv
import json
from pathlib import Path

import numpy as np
import pytest

from rashomon_al.cli import main
from rashomon_al.dataset import write_csv
from rashomon_al.datasets import synthetic_rule
from rashomon_al.errors import ConfigError
from rashomon_al.experiment import RESULT_COLUMNS, RunConfig, emit_plotdata, run_experiment


@pytest.fixture
def dataset_csv(tmp_path):
    path = tmp_path / "toy.csv"
    write_csv(synthetic_rule(n_rows=48, n_features=5, seed=1, flip_prob=0.1), path)
    return path


def quick_config(dataset_csv, out, strategy="unreal", **overrides):
    base = dict(
        dataset=str(dataset_csv),
        strategy=strategy,
        epsilon=0.02,
        lam=0.02,
        depth_cap=2,
        budget=3,
        n_replications=2,
        base_seed=7,
        output_dir=str(out),
        forest_trees=5,
        forest_depth=3,
    )
    base.update(overrides)
    return RunConfig(**base)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestRunExperiment:
    def test_row_accounting(self, dataset_csv, tmp_path):
        out = run_experiment(quick_config(dataset_csv, tmp_path / "run"))
        rows = read_rows(out / "results.csv")
        assert len(rows) == 2 * 4  # 2 replications x (budget 3 + baseline)
        assert [r["iteration"] for r in rows] == ["0", "1", "2", "3"] * 2
        assert all(r["strategy"] == "unreal" for r in rows)
        assert rows[0]["chosen_row"] == ""  # baseline has no query
        assert {r["seed"] for r in rows} == {"7", "8"}
        train0 = int(rows[0]["train_size"])
        assert [int(r["train_size"]) for r in rows[:4]] == [train0, train0 + 1, train0 + 2, train0 + 3]

    def test_determinism_excluding_wall_ms(self, dataset_csv, tmp_path):
        a = run_experiment(quick_config(dataset_csv, tmp_path / "a"))
        b = run_experiment(quick_config(dataset_csv, tmp_path / "b", output_dir=str(tmp_path / "b")))
        strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
        assert strip(read_rows(a / "results.csv")) == strip(read_rows(b / "results.csv"))

    def test_rerun_same_config_is_idempotent(self, dataset_csv, tmp_path):
        cfg = quick_config(dataset_csv, tmp_path / "run")
        first = run_experiment(cfg)
        before = (first / "manifest.json").read_text()
        second = run_experiment(cfg)
        assert first == second
        assert (second / "manifest.json").read_text() == before

    def test_rerun_different_config_refused(self, dataset_csv, tmp_path):
        run_experiment(quick_config(dataset_csv, tmp_path / "run"))
        with pytest.raises(ConfigError, match="manifest mismatch"):
            run_experiment(quick_config(dataset_csv, tmp_path / "run", epsilon=0.05))

    def test_failed_replication_recorded_not_fatal(self, dataset_csv, tmp_path):
        # budget larger than one replication's candidate pool after subsampling
        cfg = quick_config(dataset_csv, tmp_path / "run", budget=40)
        out = run_experiment(cfg)
        summary = json.loads((out / "summary.json").read_text())
        assert len(summary["failures"]) == 2  # both replications exceed the pool
        assert all("seed" in f and "error" in f for f in summary["failures"])

    def test_manifest_carries_full_config(self, dataset_csv, tmp_path):
        cfg = quick_config(dataset_csv, tmp_path / "run")
        out = run_experiment(cfg)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["tool"] == "rashomon-al"
        assert manifest["config"]["epsilon"] == 0.02
        assert manifest["config"]["strategy"] == "unreal"

    def test_parallel_jobs_match_sequential(self, dataset_csv, tmp_path):
        seq = run_experiment(quick_config(dataset_csv, tmp_path / "seq"))
        par = run_experiment(quick_config(dataset_csv, tmp_path / "par", output_dir=str(tmp_path / "par"), jobs=2))
        strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
        assert strip(read_rows(seq / "results.csv")) == strip(read_rows(par / "results.csv"))


class TestEmitPlotdata:
    @pytest.fixture
    def results_root(self, dataset_csv, tmp_path):
        root = tmp_path / "results"
        for strategy in ("unreal", "rf_qbc"):
            run_experiment(quick_config(dataset_csv, root / strategy, strategy=strategy))
        return root

    def test_learning_curves_shape(self, results_root, tmp_path):
        emitted = emit_plotdata(results_root, tmp_path / "plot")
        rows = read_rows(emitted["learning_curves"])
        assert {r["strategy"] for r in rows} == {"unreal", "rf_qbc"}
        assert {r["dataset"] for r in rows} == {"toy"}
        per_strategy = [r for r in rows if r["strategy"] == "unreal"]
        assert [r["iteration"] for r in per_strategy] == ["0", "1", "2", "3"]
        assert all(r["n_replications"] == "2" for r in rows)

    def test_counts_log_values_match_ln(self, results_root, tmp_path):
        emitted = emit_plotdata(results_root, tmp_path / "plot")
        rows = read_rows(emitted["counts"])
        assert rows, "Rashomon strategies must emit count rows"
        for row in rows:
            assert float(row["log_n_trees"]) == pytest.approx(np.log(int(row["n_trees"])))
            assert float(row["log_n_unique"]) == pytest.approx(np.log(int(row["n_unique_patterns"])))

    def test_relative_curves_baseline_zero(self, results_root, tmp_path):
        emitted = emit_plotdata(results_root, tmp_path / "plot")
        rows = read_rows(emitted["relative_curves"])
        base_rows = [r for r in rows if r["strategy"] == "rf_qbc" and r["baseline"] == "rf_qbc"]
        assert base_rows
        assert all(float(r["delta_error_mean"]) == 0.0 for r in base_rows)
        others = {r["strategy"] for r in rows}
        assert "unreal" in others

    def test_missing_baseline_warns_and_partially_emits(self, dataset_csv, tmp_path, capsys):
        root = tmp_path / "only-unreal"
        run_experiment(quick_config(dataset_csv, root / "unreal"))
        emitted = emit_plotdata(root, tmp_path / "plot")
        err = capsys.readouterr().err
        assert "rf_qbc" in err and "absent" in err
        assert "learning_curves" in emitted
        assert "relative_curves" not in emitted

    def test_duplicate_primary_key_rejected(self, dataset_csv, tmp_path):
        root = tmp_path / "dup"
        run_experiment(quick_config(dataset_csv, root / "a"))
        run_experiment(quick_config(dataset_csv, root / "b", output_dir=str(root / "b")))
        with pytest.raises(Exception, match="duplicate"):
            emit_plotdata(root, tmp_path / "plot")

    def test_sweep_output_passes_through(self, results_root, tmp_path, dataset_csv):
        assert main([
            "sweep-threshold", "--dataset", str(dataset_csv), "--epsilon-grid", "0.0,0.02",
            "--lambda", "0.02", "--depth-cap", "2", "--out", str(results_root / "sweep"),
        ]) == 0
        emitted = emit_plotdata(results_root, tmp_path / "plot")
        rows = read_rows(emitted["threshold_curve"])
        assert [r["epsilon"] for r in rows] == ["0.0", "0.02"]


class TestCliCommands:
    def test_make_data_and_enumerate(self, tmp_path, capsys):
        assert main(["make-data", "--out", str(tmp_path / "data"), "--only", "xor", "monk1"]) == 0
        out = capsys.readouterr().out
        assert "monk1.csv" in out
        assert main([
            "enumerate", "--dataset", str(tmp_path / "data" / "xor.csv"),
            "--epsilon", "0.02", "--lambda", "0.01", "--depth-cap", "2", "--show-trees", "2",
        ]) == 0
        out = capsys.readouterr().out
        assert "rashomon set size: 2" in out
        assert "(f0 (f1 (leaf 0) (leaf 1)) (f1 (leaf 1) (leaf 0)))" in out

    def test_run_and_stats(self, dataset_csv, tmp_path, capsys):
        root = tmp_path / "exp"
        for strategy in ("unreal", "passive"):
            code = main([
                "run", "--dataset", str(dataset_csv), "--strategy", strategy,
                "--epsilon", "0.02", "--lambda", "0.02", "--depth-cap", "2",
                "--budget", "6", "--replications", "2", "--base-seed", "3",
                "--out", str(root / strategy),
            ])
            assert code == 0
        assert main(["stats", "--results", str(root)]) == 0
        out = capsys.readouterr().out
        assert "pairwise two-sided signed-rank p-values" in out
        assert "unreal" in out and "passive" in out

    def test_emit_plotdata_command(self, dataset_csv, tmp_path, capsys):
        root = tmp_path / "exp"
        main([
            "run", "--dataset", str(dataset_csv), "--strategy", "unreal",
            "--epsilon", "0.02", "--lambda", "0.02", "--depth-cap", "2",
            "--budget", "2", "--replications", "1", "--out", str(root / "unreal"),
        ])
        capsys.readouterr()
        assert main(["emit-plotdata", "--results", str(root), "--out", str(tmp_path / "plots")]) == 0
        out = capsys.readouterr().out
        assert "learning_curves" in out

    def test_error_exits_nonzero_with_json_line(self, tmp_path, capsys):
        code = main(["enumerate", "--dataset", str(tmp_path / "missing.csv"), "--epsilon", "0.01"])
        assert code == 2
        err = capsys.readouterr().err.strip().splitlines()[-1]
        payload = json.loads(err)
        assert payload["error"]
        assert "message" in payload

    def test_env_var_default_output_dir(self, dataset_csv, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("RASHOMON_AL_OUT", str(tmp_path / "envout"))
        code = main([
            "run", "--dataset", str(dataset_csv), "--strategy", "unreal",
            "--epsilon", "0.02", "--lambda", "0.02", "--depth-cap", "2",
            "--budget", "1", "--replications", "1",
        ])
        assert code == 0
        assert (tmp_path / "envout" / "toy-unreal" / "results.csv").exists()
