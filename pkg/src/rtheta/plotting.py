"""Figures for fitted embeddings and evaluation reports (matplotlib, Agg)."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from rtheta.complexity_model import CandidateBasis, evaluate_many  # noqa: E402
from rtheta.embedding import CodeEmbedding, metric_samples  # noqa: E402
from rtheta.fitter import aggregate_repeats  # noqa: E402
from rtheta.harness.records import METRICS, ProfileRecord  # noqa: E402

# no software/date stamps, so reruns write identical files
_SAVE = dict(metadata={"Software": None}, dpi=110)


def _curve(quad, ns: np.ndarray):
    kind, param, intercept, r = quad
    if kind < 0:
        return None
    basis = CandidateBasis(int(kind), param)
    ns = ns[ns >= basis.min_n]
    try:
        return ns, r * evaluate_many(basis, ns) + intercept
    except OverflowError:
        return None


def plot_fits(embedding: CodeEmbedding, records: Sequence[ProfileRecord], path) -> None:
    """3x3 grid: measured medians per size and the selected curve per metric."""
    fig, axes = plt.subplots(3, 3, figsize=(11, 9))
    for ax, metric in zip(axes.flat, METRICS):
        samples = aggregate_repeats(metric_samples(records, metric))
        quad = embedding.quadruple(metric)
        ax.set_title(metric, fontsize=9)
        ax.tick_params(labelsize=7)
        if not samples:
            ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
            continue
        n = np.array([s.n for s in samples], dtype=float)
        v = np.array([s.value for s in samples])
        ax.plot(n, v, "o", ms=3, color="0.2", label="median")
        dense = np.unique(np.geomspace(n.min(), n.max(), 200).round())
        fitted = _curve(quad, dense)
        if fitted is not None:
            label = str(CandidateBasis(int(quad[0]), quad[1]).canonical())
            ax.plot(*fitted, "-", color="C0", lw=1.2, label=label)
        if n.min() > 0 and n.max() / n.min() > 50:
            ax.set_xscale("log")
        if v.min() > 0 and v.max() / v.min() > 50:
            ax.set_yscale("log")
        ax.legend(fontsize=7, frameon=False)
    fig.suptitle(embedding.program_id)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_report(report, path, title: str = "") -> None:
    """Grouped bars of per-class precision, recall and F1."""
    k = len(report.classes)
    x = np.arange(k)
    fig, ax = plt.subplots(figsize=(max(6, 0.7 * k + 2), 4))
    for i, (attr, color) in enumerate((("precision", "C0"), ("recall", "C1"), ("f1", "C2"))):
        vals = [getattr(s, attr) for s in report.per_class]
        ax.bar(x + (i - 1) * 0.27, vals, 0.27, label=attr, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels(report.classes, rotation=35, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(fontsize=8, ncol=3, loc="lower right")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
