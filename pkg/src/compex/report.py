"""Report rendering: JSON, aligned text tables, CSVs, and figures.

Every report path writes the machine-readable file and a matplotlib
figure next to it. JSON/CSV content is deterministic for identical
inputs; figures are for humans and carry no contract.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ablation import AblationRow
from .data import DatasetStats
from .evaluation import BUCKETS, MetricsReport
from .fileio import atomic_write_json, atomic_write_text


def render_metrics_table(
    overall: MetricsReport, breakdown: dict[str, MetricsReport] | None = None
) -> str:
    header = f"{'slice':>8}  {'P':>7}  {'R':>7}  {'F1':>7}  {'matched':>8}  {'pred':>6}  {'gold':>6}"
    lines = [header, "-" * len(header)]

    def row(name: str, r: MetricsReport) -> str:
        return (
            f"{name:>8}  {r.precision:7.3f}  {r.recall:7.3f}  {r.f1:7.3f}"
            f"  {r.matched:8d}  {r.predicted:6d}  {r.gold:6d}"
        )

    lines.append(row("overall", overall))
    if breakdown:
        for bucket in BUCKETS:
            if bucket in breakdown:
                lines.append(row(f"N={bucket}", breakdown[bucket]))
    return "\n".join(lines) + "\n"


def write_metrics(
    out_dir: str | Path,
    overall: MetricsReport,
    breakdown: dict[str, MetricsReport] | None = None,
    stem: str = "metrics",
) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "overall": overall.to_dict(),
        "by_relation_count": {
            b: r.to_dict(include_audit=False) for b, r in (breakdown or {}).items()
        },
        "note": "predictions deduplicated before scoring",
    }
    atomic_write_json(out_dir / f"{stem}.json", payload)
    atomic_write_text(out_dir / f"{stem}.txt", render_metrics_table(overall, breakdown))

    labels = ["overall"] + [f"N={b}" for b in BUCKETS if breakdown and b in breakdown]
    reports = [overall] + [breakdown[b] for b in BUCKETS if breakdown and b in breakdown]
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(labels), 3.2))
    width = 0.25
    xs = range(len(labels))
    for k, (metric, color) in enumerate(
        (("precision", "#4878d0"), ("recall", "#ee854a"), ("f1", "#6acc64"))
    ):
        ax.bar(
            [x + (k - 1) * width for x in xs],
            [getattr(r, metric) for r in reports],
            width=width,
            label=metric,
            color=color,
        )
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_dir / f"{stem}.png", dpi=120)
    plt.close(fig)


def write_loss_history(rows: Sequence[tuple[int, float]], out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["epoch", "mean_loss"])
    for epoch, loss in rows:
        writer.writerow([epoch, f"{loss:.6f}"])
    atomic_write_text(out_dir / "loss.csv", buf.getvalue())

    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot([e for e, _ in rows], [l for _, l in rows], marker="o", markersize=3)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean training loss")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_dir / "loss_curve.png", dpi=120)
    plt.close(fig)


def write_ablation(rows: Sequence[AblationRow], out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["prompt", "precision", "recall", "f1"])
    for row in rows:
        r = row.report
        writer.writerow([row.prompt, f"{r.precision:.4f}", f"{r.recall:.4f}", f"{r.f1:.4f}"])
    atomic_write_text(out_dir / "ablation.csv", buf.getvalue())

    fig, ax = plt.subplots(figsize=(6, 0.6 + 0.5 * len(rows)))
    names = [row.prompt for row in rows][::-1]
    scores = [row.report.f1 for row in rows][::-1]
    ax.barh(range(len(rows)), scores, color="#4878d0")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xlabel("F1")
    ax.set_xlim(0, 1.0)
    fig.tight_layout()
    fig.savefig(out_dir / "ablation.png", dpi=120)
    plt.close(fig)


def render_stats_table(stats: DatasetStats) -> str:
    lines = [
        f"sentences: {stats.sentence_count}",
        f"relations: {stats.relation_count}",
        "",
        f"{'relations/sentence':>20}  {'count':>6}  {'of all':>8}  {'of comparative':>15}",
    ]
    for k in sorted(stats.histogram):
        frac_all = stats.fractions_all.get(k, 0.0)
        frac_comp = stats.fractions_comparative.get(k)
        comp = f"{frac_comp:15.3f}" if frac_comp is not None else " " * 15
        lines.append(f"{k:>20}  {stats.histogram[k]:>6}  {frac_all:8.3f}  {comp}")
    return "\n".join(lines) + "\n"


def write_stats(stats: DatasetStats, out_dir: str | Path, stem: str = "stats") -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_json(out_dir / f"{stem}.json", stats.to_dict())
    atomic_write_text(out_dir / f"{stem}.txt", render_stats_table(stats))

    ks = sorted(stats.histogram)
    fig, ax = plt.subplots(figsize=(4.5, 3))
    ax.bar([str(k) for k in ks], [stats.histogram[k] for k in ks], color="#4878d0")
    ax.set_xlabel("relations per sentence")
    ax.set_ylabel("sentences")
    fig.tight_layout()
    fig.savefig(out_dir / f"{stem}_histogram.png", dpi=120)
    plt.close(fig)
