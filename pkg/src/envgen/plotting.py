"""Static SVG charts from run artifacts.

All writers pin matplotlib's SVG hash salt and strip date metadata, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .run.plan import geometric_mean_score  # noqa: E402
from .run.transcript import read_jsonl  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "envgen"

CSV_SCHEMA = ("achievement", "mean_pct", "std_pct")


class PlotInputError(ValueError):
    """Missing or malformed plot inputs; the message lists what is expected."""


def write_rates_csv(path, rates: dict, stds: dict | None = None) -> Path:
    """Per-achievement CSV with the columns cmd_plot consumes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stds = stds or {}
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_SCHEMA)
        for name, value in rates.items():
            writer.writerow([name, f"{value:.6f}", f"{stds.get(name, 0.0):.6f}"])
    return path


def read_rates_csv(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise PlotInputError(f"no such CSV: {path}; expected columns {CSV_SCHEMA}")
    with path.open() as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_SCHEMA if c not in (reader.fieldnames or ())]
        if missing:
            raise PlotInputError(
                f"{path} lacks columns {missing}; expected schema {CSV_SCHEMA}"
            )
        rows = {
            row["achievement"]: (float(row["mean_pct"]), float(row["std_pct"]))
            for row in reader
        }
    if not rows:
        raise PlotInputError(f"{path} holds no rows; expected schema {CSV_SCHEMA}")
    return rows


def _save(fig, out_path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def plot_success_rates(csv_paths: list, out_path, labels: list | None = None) -> Path:
    """Grouped per-achievement bar chart comparing two or more runs."""
    if len(csv_paths) < 2:
        raise PlotInputError("success-rate comparison needs at least two run CSVs")
    tables = [read_rates_csv(p) for p in csv_paths]
    labels = labels or [Path(p).parent.name or f"run{i}" for i, p in enumerate(csv_paths)]
    achievements = list(tables[0])
    for i, table in enumerate(tables[1:], start=1):
        if list(table) != achievements:
            raise PlotInputError(
                f"{csv_paths[i]} lists different achievements than {csv_paths[0]}"
            )
    n_groups, n_runs = len(achievements), len(tables)
    width = 0.8 / n_runs
    fig, ax = plt.subplots(figsize=(max(8, n_groups * 0.55), 4.5))
    for run_index, table in enumerate(tables):
        xs = [g + run_index * width for g in range(n_groups)]
        means = [table[a][0] for a in achievements]
        errs = [table[a][1] for a in achievements]
        ax.bar(xs, means, width=width, yerr=errs, capsize=2, label=labels[run_index])
    ax.set_xticks([g + 0.4 - width / 2 for g in range(n_groups)])
    ax.set_xticklabels([a.replace("_", "\n") for a in achievements], fontsize=7)
    ax.set_ylabel("success rate (%)")
    ax.set_title("Per-achievement success rates")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def plot_unlock_curves(metrics_path, out_path, achievements: list) -> Path:
    """Cumulative unlock counts over training steps for named achievements."""
    metrics_path = Path(metrics_path)
    if not metrics_path.exists():
        raise PlotInputError(
            f"no such metrics stream: {metrics_path}; expected a metrics.jsonl with "
            "unlock events {type, gstep, achievement}"
        )
    events = [e for e in read_jsonl(metrics_path) if e.get("type") == "unlock"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in achievements:
        steps = sorted(e["gstep"] for e in events if e["achievement"] == name)
        xs, ys = [0], [0]
        for i, s in enumerate(steps, start=1):
            xs.append(s)
            ys.append(i)
        ax.step(xs, ys, where="post", label=name.replace("_", " "))
    ax.set_xlabel("environment step")
    ax.set_ylabel("cumulative unlocks")
    ax.set_title("Unlock times")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def plot_score_curve(transcript_path, out_path) -> Path:
    """Aggregate score after each cycle's evaluation, from a run transcript."""
    transcript_path = Path(transcript_path)
    if not transcript_path.exists():
        raise PlotInputError(
            f"no such transcript: {transcript_path}; expected transcript.jsonl with "
            "perf_report events"
        )
    reports = [e for e in read_jsonl(transcript_path) if e["event"] == "perf_report"]
    if not reports:
        raise PlotInputError(
            f"{transcript_path} holds no perf_report events; run an adaptive "
            "curriculum to produce per-cycle evaluations"
        )
    cycles = [e["cycle"] for e in reports]
    scores = [
        100.0
        * geometric_mean_score(
            [stat["mean"] / 100.0 for stat in e["report"]["per_achievement"].values()]
        )
        for e in reports
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cycles, scores, marker="o")
    ax.set_xticks(cycles)
    ax.set_xlabel("training cycle")
    ax.set_ylabel("score (%)")
    ax.set_title("Score by cycle")
    fig.tight_layout()
    return _save(fig, out_path)
