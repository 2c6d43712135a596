"""Figure rendering for report outputs (written to files, never shown)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .loopclosure import Ranking  # noqa: E402
from .metrics import MetricsReport  # noqa: E402


def save_metrics_figure(reports: dict[str, MetricsReport], path) -> None:
    """Grouped bar chart of MOTA / IDF1 / HOTA per labeled run."""
    labels = list(reports)
    metrics = ["MOTA", "IDF1", "HOTA"]
    values = [
        [reports[lbl].mota for lbl in labels],
        [reports[lbl].idf1 for lbl in labels],
        [reports[lbl].hota for lbl in labels],
    ]
    fig, ax = plt.subplots(figsize=(1.5 + 1.2 * len(labels), 4))
    width = 0.8 / len(metrics)
    for k, (name, vals) in enumerate(zip(metrics, values)):
        xs = [i + k * width for i in range(len(labels))]
        ax.bar(xs, vals, width=width, label=name)
    ax.set_xticks([i + width for i in range(len(labels))])
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ranking_figure(
    rankings: list[Ranking],
    gt: dict[int, int] | None,
    k: int,
    path,
) -> None:
    """Best-candidate frame per query, with ground truth overlaid if known."""
    fig, ax = plt.subplots(figsize=(6, 4))
    queries = [r.query_frame for r in rankings]
    best = [r.candidates[0][0] if r.candidates else float("nan")
            for r in rankings]
    ax.scatter(queries, best, s=18, label=f"best of top-{k}")
    if gt:
        gts = [gt.get(q, float("nan")) for q in queries]
        ax.plot(queries, gts, "r--", linewidth=1, label="ground truth")
    ax.set_xlabel("query frame")
    ax.set_ylabel("matched past frame")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def metrics_table(reports: dict[str, MetricsReport]) -> str:
    """Aligned text table, one row per labeled run."""
    header = ["run", "MOTA", "IDF1", "HOTA", "TP", "FP", "FN", "IDSW"]
    rows = [header]
    for label, r in reports.items():
        rows.append([
            label, f"{r.mota:.1f}", f"{r.idf1:.1f}", f"{r.hota:.1f}",
            str(r.tp), str(r.fp), str(r.fn), str(r.idsw),
        ])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    out = []
    for row in rows:
        out.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(out)
