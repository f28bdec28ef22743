"""Matplotlib figure rendering for the report paths.

Figures land next to the delimited/JSON outputs: bounding-box scatter plots
for dataset statistics, PR curves for evaluation reports, and a bar chart
for multi-model comparisons. Output format follows the file extension
(.png or .svg).
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .core import CLASS_LABELS
from .manifest import DatasetStats
from .metrics import MetricReport

_CMAP = plt.get_cmap("tab10")


def plot_dataset_stats(stats: DatasetStats, path: str | Path) -> None:
    """Center-position and width/height scatter, per class."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 5))
    for cid in sorted({c for _, _, c in stats.centers} | {c for _, _, c in stats.sizes}):
        color = _CMAP(cid % 10)
        cs = [(x, y) for x, y, c in stats.centers if c == cid]
        ss = [(w, h) for w, h, c in stats.sizes if c == cid]
        if cs:
            axes[0].scatter(*zip(*cs), s=8, color=color, label=CLASS_LABELS[cid])
        if ss:
            axes[1].scatter(*zip(*ss), s=8, color=color, label=CLASS_LABELS[cid])
    axes[0].set_xlabel("center x (normalized)")
    axes[0].set_ylabel("center y (normalized)")
    axes[0].set_xlim(0, 1)
    axes[0].set_ylim(1, 0)
    axes[0].set_title("bounding-box centers")
    axes[1].set_xlabel("width (px)")
    axes[1].set_ylabel("height (px)")
    axes[1].set_title("bounding-box sizes")
    if stats.centers:
        axes[0].legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(str(path))
    plt.close(fig)


def plot_pr_curves(report: MetricReport, path: str | Path) -> None:
    """One PR curve per class that has ground truth."""
    fig, ax = plt.subplots(figsize=(6.5, 5))
    for cid, m in sorted(report.per_class.items()):
        if m.curve is None or not m.curve.points:
            continue
        rs = [0.0] + [r for r, _ in m.curve.points]
        ps = [m.curve.points[0][1]] + [p for _, p in m.curve.points]
        ax.plot(rs, ps, color=_CMAP(cid % 10), label=f"{m.label} (AP {m.ap:.3f})")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.05)
    ax.set_title(f"precision-recall, mAP@{report.iou_threshold:g} = {report.map_50:.3f}")
    ax.legend(fontsize=7, loc="lower left")
    fig.tight_layout()
    fig.savefig(str(path))
    plt.close(fig)


def plot_comparison(rows: list[dict], path: str | Path) -> None:
    """Bar chart of mAP@0.5 (and per-image timing when present) per model."""
    names = [r["model_name"] for r in rows]
    maps = [r["map_50"] for r in rows]
    times = [r.get("seconds_per_image") for r in rows]
    has_times = any(t is not None for t in times)
    fig, axes = plt.subplots(1, 2 if has_times else 1, figsize=(10 if has_times else 5.5, 4))
    ax0 = axes[0] if has_times else axes
    ax0.bar(names, maps, color=[_CMAP(i % 10) for i in range(len(names))])
    ax0.set_ylabel("mAP@0.5")
    ax0.set_ylim(0, 1.05)
    ax0.tick_params(axis="x", rotation=20)
    if has_times:
        axes[1].bar(
            names,
            [t if t is not None else 0.0 for t in times],
            color=[_CMAP(i % 10) for i in range(len(names))],
        )
        axes[1].set_ylabel("seconds per image")
        axes[1].tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(str(path))
    plt.close(fig)
