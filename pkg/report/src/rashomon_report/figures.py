"""Figure rendering over the tidy CSVs emitted by `rashomon-al emit-plotdata`.

Four figure kinds are supported:
  learning_curve   per-strategy metric curves with +/-1 SE bands
  relative_curve   per-strategy error deltas against a baseline (baseline at 0)
  count_curve      Rashomon-set size vs unique-pattern count, log vertical axis
  threshold_curve  ensemble test error against the threshold, argmin annotated

Rendering only reads the CSVs; nothing is recomputed from raw results.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("learning_curve", "relative_curve", "count_curve", "threshold_curve")

STRATEGY_STYLE = {
    "passive": ("black", "Passive"),
    "rf_qbc": ("tab:green", "RF"),
    "dureal": ("tab:orange", "DUREAL"),
    "unreal": ("tab:blue", "UNREAL"),
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input: str
    output: str
    baseline: str | None = None  # relative_curve only
    metric: str = "error"  # learning_curve only: "error" or "f1"
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not Path(self.input).exists():
            raise FileNotFoundError(f"figure input {self.input} does not exist")
        if self.kind == "relative_curve" and not self.baseline:
            raise ValueError("relative_curve needs a baseline strategy")


def load_spec_file(path, out_dir=None) -> list[FigureSpec]:
    """Read a declarative JSON list of figure specs.

    Relative output paths are resolved against out_dir when given.
    """
    entries = json.loads(Path(path).read_text())
    if not isinstance(entries, list):
        raise ValueError("figure spec file must hold a JSON list")
    specs = []
    for entry in entries:
        if out_dir is not None and not Path(entry.get("output", "")).is_absolute():
            entry = dict(entry, output=str(Path(out_dir) / entry["output"]))
        specs.append(FigureSpec(**entry))
    return specs


def _read_csv(path, required: set[str]) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing column(s) {sorted(missing)}")
        return list(reader)


def _style(strategy: str):
    return STRATEGY_STYLE.get(strategy, (None, strategy))


def _series(rows, key):
    return np.array([float(r[key]) for r in rows])


def render(spec: FigureSpec):
    """Render one figure to spec.output; returns the matplotlib Figure."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if spec.kind == "learning_curve":
        _render_learning(ax, spec)
    elif spec.kind == "relative_curve":
        _render_relative(ax, spec)
    elif spec.kind == "count_curve":
        _render_counts(ax, spec)
    else:
        _render_threshold(ax, spec)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return fig


def _render_learning(ax, spec: FigureSpec):
    rows = _read_csv(spec.input, {"strategy", "iteration", "mean_error", "se_error", "mean_f1", "se_f1"})
    mean_key, se_key = (f"mean_{spec.metric}", f"se_{spec.metric}")
    for strategy in sorted({r["strategy"] for r in rows}):
        mine = sorted((r for r in rows if r["strategy"] == strategy), key=lambda r: int(r["iteration"]))
        x = _series(mine, "iteration")
        y = _series(mine, mean_key)
        se = _series(mine, se_key)
        color, label = _style(strategy)
        (line,) = ax.plot(x, y, label=label, color=color)
        ax.fill_between(x, y - se, y + se, alpha=0.2, color=line.get_color())
    ax.set_xlabel("iteration")
    ax.set_ylabel(f"test {spec.metric}")
    ax.legend()


def _render_relative(ax, spec: FigureSpec):
    rows = _read_csv(spec.input, {"strategy", "baseline", "iteration", "delta_error_mean", "delta_error_se"})
    rows = [r for r in rows if r["baseline"] == spec.baseline]
    if not rows:
        raise ValueError(f"{spec.input}: no rows with baseline {spec.baseline!r}")
    for strategy in sorted({r["strategy"] for r in rows}):
        mine = sorted((r for r in rows if r["strategy"] == strategy), key=lambda r: int(r["iteration"]))
        x = _series(mine, "iteration")
        y = _series(mine, "delta_error_mean")
        se = _series(mine, "delta_error_se")
        color, label = _style(strategy)
        (line,) = ax.plot(x, y, label=label, color=color)
        ax.fill_between(x, y - se, y + se, alpha=0.2, color=line.get_color())
    _, baseline_label = _style(spec.baseline)
    ax.set_xlabel("iteration")
    ax.set_ylabel(f"test error relative to {baseline_label}")
    ax.legend()


def _render_counts(ax, spec: FigureSpec):
    rows = _read_csv(spec.input, {"strategy", "replication", "iteration", "n_trees", "n_unique_patterns"})
    by_iter: dict[int, tuple[list, list]] = {}
    for r in rows:
        slot = by_iter.setdefault(int(r["iteration"]), ([], []))
        slot[0].append(float(r["n_trees"]))
        slot[1].append(float(r["n_unique_patterns"]))
    iterations = sorted(by_iter)
    trees = np.array([np.mean(by_iter[i][0]) for i in iterations])
    unique = np.array([np.mean(by_iter[i][1]) for i in iterations])
    ax.plot(iterations, trees, label="All trees", color="tab:orange")
    ax.plot(iterations, unique, label="Unique patterns", color="tab:blue")
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("count")
    ax.legend()


def _render_threshold(ax, spec: FigureSpec):
    rows = _read_csv(spec.input, {"epsilon", "ensemble_test_error"})
    rows = sorted(rows, key=lambda r: float(r["epsilon"]))
    x = _series(rows, "epsilon")
    y = _series(rows, "ensemble_test_error")
    ax.plot(x, y, marker="o", color="tab:blue")
    best = int(np.argmin(y))
    ax.scatter([x[best]], [y[best]], color="tab:red", zorder=3)
    ax.annotate(
        f"argmin at {x[best]:g}",
        xy=(x[best], y[best]),
        xytext=(10, 12),
        textcoords="offset points",
        color="tab:red",
    )
    ax.set_xlabel("Rashomon threshold")
    ax.set_ylabel("ensemble test error")
