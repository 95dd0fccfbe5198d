"""Figure rendering for reports: grouped bar charts per difficulty band.

Written to files next to the delimited output; one PNG per metric.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import MetricsReport

_SERIES = (
    ("avg solo", "#4878d0"),
    ("best solo", "#6acc64"),
    ("group", "#d65f5f"),
)

_METRICS = (
    ("moves", "mean_moves", "Mean moves per solved puzzle"),
    ("quality", "mean_quality", "Mean solution quality (moves - optimal)"),
    ("time_s", "mean_time_s", "Mean time to solution (s)"),
)


def render_figures(report: MetricsReport, out_dir: str | Path) -> list[Path]:
    """Render one bar chart per metric; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for member_metric, stat_attr, title in _METRICS:
        values = {label: [] for label, _ in _SERIES}
        for b in report.bands:
            agg = report.members.get((b, member_metric))
            group = report.stats.get((b, "group"))
            values["avg solo"].append(agg.average_member if agg else 0.0)
            values["best solo"].append(agg.best_member if agg else 0.0)
            values["group"].append(getattr(group, stat_attr) if group else 0.0)
        fig, ax = plt.subplots(figsize=(7, 4))
        n = len(report.bands)
        width = 0.25
        for i, (label, color) in enumerate(_SERIES):
            xs = [x + (i - 1) * width for x in range(n)]
            bars = ax.bar(xs, values[label], width=width, label=label, color=color)
            ax.bar_label(bars, fmt="%.1f", fontsize=8)
        ax.set_xticks(range(n))
        ax.set_xticklabels(report.bands)
        ax.set_xlabel("difficulty band")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"report_{member_metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
