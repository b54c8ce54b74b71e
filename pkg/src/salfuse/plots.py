"""Figure rendering for benchmark reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import TimingReport


def render_bench_figure(reports: Sequence[TimingReport], path: Path | str) -> None:
    """Horizontal bar chart of best wall time per method, annotated per frame."""
    fig, ax = plt.subplots(figsize=(6.4, 1.2 + 0.7 * len(reports)))
    methods = [r.method for r in reports]
    walls = [r.wall_seconds for r in reports]
    bars = ax.barh(methods, walls, color="#4878cf")
    for bar, report in zip(bars, reports):
        ax.annotate(
            f"{report.per_frame_ms:.2f} ms/frame",
            xy=(bar.get_width(), bar.get_y() + bar.get_height() / 2),
            xytext=(4, 0),
            textcoords="offset points",
            va="center",
            fontsize=8,
        )
    ax.set_xlabel("wall time (s, best of repeats)")
    ax.invert_yaxis()
    if reports:
        first = reports[0]
        ax.set_title(f"{first.frames} frames at {first.width}x{first.height}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
