"""Render prediction/sweep/trial outputs as figures plus delimited summaries.

Consumes the files the CLI subcommands write (estimate ``report.json`` with
its ``weights.csv``, ablation sweep CSVs, trial JSONL) and produces PNG
figures next to a ``report_summary.csv``. Headless backend; nothing here
feeds back into estimation.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError

__all__ = ["render_weights_figure", "render_sweep_figures", "render_trials_figure", "render_report"]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_weights_figure(weights_csv, out_dir) -> list:
    """Histogram of raw weights plus the truncated/normalized profile."""
    raws, truncs = [], []
    with open(weights_csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            raws.append(float(row["raw"]))
            truncs.append(float(row["truncated"]))
    if not raws:
        raise DataError(f"{weights_csv}: no weight rows")
    raws = np.asarray(raws)
    truncs = np.asarray(truncs)

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    bins = np.logspace(np.log10(max(raws.min(), 1e-12)), np.log10(raws.max() + 1e-12), 40)
    axes[0].hist(raws, bins=bins, color="#4878d0", alpha=0.85)
    axes[0].set_xscale("log")
    axes[0].set_xlabel("raw weight")
    axes[0].set_ylabel("count")
    axes[0].set_title("Raw importance weights")
    order = np.argsort(raws)
    axes[1].plot(raws[order], label="raw", lw=1.2)
    axes[1].plot(truncs[order], label="truncated", lw=1.2)
    axes[1].set_yscale("log")
    axes[1].set_xlabel("source point (sorted by weight)")
    axes[1].set_ylabel("weight")
    axes[1].legend()
    axes[1].set_title("Truncation profile")
    out = Path(out_dir) / "weights_hist.png"
    return [_save(fig, out)]


def render_sweep_figures(sweep_csv, out_dir) -> list:
    """Error and diagnostics curves over a sweep grid."""
    rows = []
    with open(sweep_csv, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DataError(f"{sweep_csv}: empty sweep")
    labels = [row["value"] for row in rows]
    x = np.arange(len(rows))
    abs_err = [float(row["abs_error"]) for row in rows]
    ess = [float(row["effective_sample_size"]) for row in rows]
    evr = [float(row["extreme_value_ratio"]) for row in rows]
    sweep_name = rows[0]["sweep"]

    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(x, abs_err, "o-", color="#d65f5f")
    ax.set_xticks(x, labels)
    ax.set_xlabel(sweep_name)
    ax.set_ylabel("absolute error")
    ax.set_title(f"Estimate error across {sweep_name}")
    paths = [_save(fig, Path(out_dir) / "sweep_error.png")]

    fig, ax1 = plt.subplots(figsize=(5.5, 3.5))
    ax1.plot(x, ess, "s-", color="#4878d0", label="effective sample size")
    ax1.set_xticks(x, labels)
    ax1.set_xlabel(sweep_name)
    ax1.set_ylabel("effective sample size", color="#4878d0")
    ax2 = ax1.twinx()
    ax2.plot(x, evr, "^--", color="#ee854a", label="extreme value ratio")
    ax2.set_ylabel("extreme value ratio", color="#ee854a")
    ax1.set_title(f"Weight diagnostics across {sweep_name}")
    paths.append(_save(fig, Path(out_dir) / "sweep_diagnostics.png"))
    return paths


def render_trials_figure(trials_jsonl, out_dir) -> list:
    """Per-seed estimate vs oracle for a batch of synthetic trials."""
    trials = []
    with open(trials_jsonl, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                trials.append(json.loads(line))
    if not trials:
        raise DataError(f"{trials_jsonl}: no trials")
    x = np.arange(len(trials))
    est = [t["estimate"] for t in trials]
    truth = [t["oracle_truth"] for t in trials]

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(x, est, "o", label="estimate", color="#4878d0")
    ax.plot(x, truth, "k--", lw=1, label="oracle truth")
    ax.set_xlabel("trial")
    ax.set_ylabel("mean score")
    ax.set_title("Synthetic trials: estimate vs oracle")
    ax.legend()
    return [_save(fig, Path(out_dir) / "trials_estimates.png")]


def render_report(inputs, out_dir) -> dict:
    """Render every recognized input file; returns a manifest of outputs.

    Recognizes estimate report directories and files named ``weights.csv``,
    ``sweep_*.csv``/``*.csv`` with a sweep column, and ``*.jsonl`` trial
    files. Writes figures plus ``report_summary.csv`` into ``out_dir``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    figures, summary_rows = [], []

    for raw in inputs:
        path = Path(raw)
        if path.is_dir():
            candidates = sorted(path.iterdir())
        else:
            candidates = [path]
        for p in candidates:
            if p.name == "report.json":
                payload = json.loads(p.read_text())
                for key in ("prediction", "n_source", "percentile", "error"):
                    if key in payload:
                        summary_rows.append((f"{p}", key, payload[key]))
                for key, value in payload.get("diagnostics", {}).items():
                    summary_rows.append((f"{p}", key, value))
            elif p.name == "weights.csv":
                figures += render_weights_figure(p, out_dir)
            elif p.suffix == ".csv":
                with open(p, newline="", encoding="utf-8") as fh:
                    header = next(csv.reader(fh), [])
                if "sweep" in header:
                    figures += render_sweep_figures(p, out_dir)
            elif p.suffix == ".jsonl":
                figures += render_trials_figure(p, out_dir)
                with open(p, encoding="utf-8") as fh:
                    errs = [json.loads(line)["abs_error"] for line in fh if line.strip()]
                summary_rows.append((f"{p}", "mean_abs_error", float(np.mean(errs))))
                summary_rows.append((f"{p}", "max_abs_error", float(np.max(errs))))

    summary = out_dir / "report_summary.csv"
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "key", "value"])
        writer.writerows(summary_rows)
    return {"figures": [str(f) for f in figures], "summary": str(summary)}
