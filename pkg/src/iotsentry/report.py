"""Rendering of evaluation artefacts: delimited tables and SVG figures.

Figures are written through the Agg backend with a fixed hash salt and a
blank date, so rendering the same evaluation twice produces identical
bytes.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "iotsentry"

import matplotlib.pyplot as plt
import numpy as np

from .metrics import ConfusionMatrix, EvaluationReport, RocSummary

_SVG_META = {"Date": None}


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def _names(cm: ConfusionMatrix) -> list[str]:
    if cm.class_names:
        return list(cm.class_names)
    return [str(i) for i in range(cm.counts.shape[0])]


def write_confusion_csv(path: str, cm: ConfusionMatrix, normalize: bool = False) -> None:
    """Confusion matrix as CSV: one row per true class, columns predicted.

    With ``normalize`` each row is divided by its total, empty rows
    staying zero.
    """
    names = _names(cm)
    counts = cm.counts.astype(np.float64)
    if normalize:
        totals = counts.sum(axis=1, keepdims=True)
        counts = np.divide(counts, np.where(totals > 0, totals, 1.0))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\predicted"] + names)
        for i, row in enumerate(counts):
            if normalize:
                writer.writerow([names[i]] + [repr(float(v)) for v in row])
            else:
                writer.writerow([names[i]] + [int(v) for v in row])


def write_roc_csv(path: str, roc: RocSummary, class_names: list[str]) -> None:
    """ROC curves on the shared false-positive grid, one column per curve."""
    grid = roc.grid_fpr
    micro = np.interp(grid, roc.micro.fpr, roc.micro.tpr)
    per_class = [np.interp(grid, c.fpr, c.tpr) for c in roc.per_class]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "macro", "micro"] + list(class_names))
        for i in range(grid.size):
            row = [grid[i], roc.macro_tpr[i], micro[i]] + [c[i] for c in per_class]
            writer.writerow([repr(float(v)) for v in row])


def plot_roc(path: str, roc: RocSummary, class_names: list[str], title: str) -> None:
    """One-vs-rest ROC curves with the macro and micro averages."""
    fig, ax = plt.subplots(figsize=(7.0, 5.5))
    for curve, name in zip(roc.per_class, class_names):
        ax.plot(curve.fpr, curve.tpr, linewidth=0.9, alpha=0.65,
                label=f"{name} (auc={curve.auc:.3f})")
    ax.plot(roc.grid_fpr, roc.macro_tpr, color="black", linewidth=2.0,
            label=f"macro (auc={roc.macro_auc:.3f})")
    ax.plot(roc.micro.fpr, roc.micro.tpr, color="black", linewidth=2.0,
            linestyle="--", label=f"micro (auc={roc.micro.auc:.3f})")
    ax.plot([0, 1], [0, 1], color="grey", linewidth=0.8, linestyle=":")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.02)
    ax.set_title(title)
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    _save(fig, path)


def plot_confusion(path: str, cm: ConfusionMatrix, title: str) -> None:
    """Row-normalized confusion heatmap with counts annotated."""
    names = _names(cm)
    counts = cm.counts.astype(np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    shares = np.divide(counts, np.where(totals > 0, totals, 1.0))
    k = len(names)
    fig, ax = plt.subplots(figsize=(1.0 + 0.62 * k, 0.8 + 0.55 * k))
    im = ax.imshow(shares, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(k), names, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(k), names, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title)
    for i in range(k):
        for j in range(k):
            if counts[i, j] > 0:
                colour = "white" if shares[i, j] > 0.5 else "black"
                ax.text(j, i, f"{int(counts[i, j])}", ha="center", va="center",
                        fontsize=6, color=colour)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, path)


def plot_comparison(path: str, reports: dict[str, EvaluationReport]) -> None:
    """Accuracy and macro-F1 bars for every evaluated model."""
    names = list(reports)
    acc = [reports[n].aggregate.accuracy for n in names]
    mf1 = [reports[n].aggregate.macro_f1 for n in names]
    x = np.arange(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(1.5 + 1.2 * len(names), 4.2))
    bars_a = ax.bar(x - width / 2, acc, width, label="accuracy")
    bars_f = ax.bar(x + width / 2, mf1, width, label="macro F1")
    for bars in (bars_a, bars_f):
        for b in bars:
            ax.text(b.get_x() + b.get_width() / 2, b.get_height() + 0.004,
                    f"{b.get_height():.3f}", ha="center", va="bottom", fontsize=7)
    ax.set_xticks(x, names)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("held-out score")
    ax.set_title("model comparison")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    _save(fig, path)
