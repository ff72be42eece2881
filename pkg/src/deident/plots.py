"""PNG figures for the risk, evaluation and QC reports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def risk_figure(report, threshold, path: Path) -> Path:
    """Records per equivalence-class size, with the size the threshold demands."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    sizes = sorted(report.class_sizes)
    if sizes:
        ax.bar([str(s) for s in sizes], [report.class_sizes[s] * s for s in sizes], color="#4c72b0")
    ax.set_xlabel("equivalence class size")
    ax.set_ylabel("records")
    k_needed = math.ceil(1 / threshold)
    ax.set_title(f"max risk {float(report.max_risk):.3f} (threshold {float(threshold):.3f}, k >= {k_needed})")
    return _save(fig, path)


def eval_figure(report, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    cats = sorted(report.counts)
    checked = [sum(report.counts[c]) for c in cats]
    failed = [report.counts[c][1] for c in cats]
    xs = range(len(cats))
    ax.bar([x - 0.2 for x in xs], checked, width=0.4, label="checked", color="#55a868")
    ax.bar([x + 0.2 for x in xs], failed, width=0.4, label="failed", color="#c44e52")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(cats, rotation=30, ha="right", fontsize=8)
    ax.set_yscale("symlog")
    ax.legend()
    ax.set_title(f"evaluation: {report.failure_count} failures")
    return _save(fig, path)


def qc_figure(pool, path: Path, top: int = 25) -> Path:
    """Most frequent retained phrases; anything person-like here needs a look."""
    ranked = sorted(pool, key=lambda cp: (-cp[0], cp[1]))[:top]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.25 * len(ranked) + 1)))
    if ranked:
        ax.barh([p[:40] for _, p in reversed(ranked)], [c for c, _ in reversed(ranked)], color="#8172b2")
    ax.set_xlabel("occurrences")
    ax.tick_params(axis="y", labelsize=7)
    ax.set_title("retained text phrases")
    return _save(fig, path)
