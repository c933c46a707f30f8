"""Render sweep results as figures next to the CSV output.

The CSV stays the machine contract; these plots are the human-facing
view of the same rows. Uses the Agg backend so rendering works headless.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .metrics import EvalReport


def render_sweep_figures(reports: Iterable[EvalReport], out_dir: str | Path) -> list[Path]:
    """Write the PR curve and the metric-vs-threshold panel as PNG files."""
    rows = sorted(reports, key=lambda r: r.threshold or 0)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    thresholds = [r.threshold for r in rows]
    precision = [r.precision for r in rows]
    recall = [r.recall for r in rows]
    f1 = [r.f1 for r in rows]
    detected = [r.detected_count for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.plot(recall, precision, marker="o", ms=3, lw=1.2)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.set_title("Precision-Recall over vote thresholds")
    fig.tight_layout()
    path = out / "sweep_pr_curve.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.plot(thresholds, precision, label="precision", lw=1.2)
    ax1.plot(thresholds, recall, label="recall", lw=1.2)
    ax1.plot(thresholds, f1, label="F1", lw=1.5)
    ax1.set_xlabel("vote threshold T")
    ax1.set_ylim(-0.02, 1.02)
    ax1.grid(alpha=0.3)
    ax1.legend()
    ax2.plot(thresholds, detected, color="tab:red", lw=1.2)
    ax2.set_xlabel("vote threshold T")
    ax2.set_ylabel("detected users")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    path = out / "sweep_metrics.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written
