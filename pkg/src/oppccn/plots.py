"""Figures for the ``run`` report: per-run bars with the aggregate mean and 95% CI."""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import MetricsReport, aggregate  # noqa: E402

FIGURES = [
    ("delivery_rate", "Delivery rate", "delivery_rate.png"),
    ("delay_mean_s", "Mean end-to-end delay (s)", "delay.png"),
    ("hops_mean", "Mean Data hops", "hops.png"),
    ("cache_util_pct", "Cache utilization increase (%)", "cache_util.png"),
]


def _bar(ax, values: Sequence[float], mean: float, ci, label: str) -> None:
    xs = list(range(len(values)))
    ax.bar(xs, [0 if math.isnan(v) else v for v in values], color="#8aa9c9")
    if not math.isnan(mean):
        ax.axhline(mean, color="#203a5a", lw=1.5, label=f"mean {mean:.4g}")
        if ci:
            ax.axhspan(mean - ci, mean + ci, color="#203a5a", alpha=0.15)
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("run")
    ax.set_ylabel(label)
    ax.set_xticks(xs)


def plot_runs(reports: Sequence[MetricsReport], out_dir, prefix: str = "") -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    agg = aggregate(reports)
    rows = [r.row() for r in reports]
    title = f"{reports[0].protocol} (cache {'on' if reports[0].cache else 'off'})"
    paths = []
    for key, label, fname in FIGURES:
        fig, ax = plt.subplots(figsize=(5, 3.2))
        _bar(ax, [row[key] for row in rows], agg.mean[key], agg.ci95[key], label)
        ax.set_title(title, fontsize=9)
        fig.tight_layout()
        path = out_dir / f"{prefix}{fname}"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        paths.append(path)

    # traffic split, stacked per run
    fig, ax = plt.subplots(figsize=(5, 3.2))
    bottom = [0.0] * len(rows)
    for key, color in (("bytes_interest", "#c98a8a"), ("bytes_data", "#8aa9c9"),
                       ("bytes_control", "#9cc98a")):
        vals = [float(row[key]) for row in rows]
        ax.bar(range(len(rows)), vals, bottom=bottom, color=color, label=key.split("_")[1])
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_xlabel("run")
    ax.set_ylabel("bytes sent")
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / f"{prefix}traffic.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    paths.append(path)
    return paths
