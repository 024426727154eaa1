"""Evaluation metrics for multi-class classifiers.

Covers confusion matrices, per-class precision/recall/F1 with macro and
support-weighted aggregation, accuracy, and one-vs-rest ROC curves with
trapezoidal AUC plus macro and micro averages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._common import as_label_ids

ROC_GRID_POINTS = 512


def _validate_pair(y_true, y_pred, n_classes: int | None):
    t, classes, level = as_label_ids(y_true, n_classes)
    p, _, _ = as_label_ids(y_pred, n_classes)
    if t.size != p.size:
        raise ValueError("y_true and y_pred disagree on row count")
    if t.size == 0:
        raise ValueError("cannot score zero rows")
    k = n_classes
    if k is None:
        k = len(classes) if classes else int(max(t.max(), p.max())) + 1
    if t.max() >= k or p.max() >= k:
        raise ValueError("label id outside [0, n_classes)")
    return t, p, k, classes, level


@dataclass
class ConfusionMatrix:
    """Counts indexed [true_class, predicted_class]."""

    counts: np.ndarray
    class_names: list[str] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def normalized(self) -> np.ndarray:
        """Rows rescaled to sum to 1; all-zero rows stay zero."""
        row = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        safe = np.where(row > 0, row, 1.0)
        return self.counts / safe


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> ConfusionMatrix:
    t, p, k, classes, _ = _validate_pair(y_true, y_pred, n_classes)
    flat = np.bincount(t * k + p, minlength=k * k)
    return ConfusionMatrix(flat.reshape(k, k).astype(np.int64), classes or [])


def accuracy(y_true, y_pred) -> float:
    t, p, _, _, _ = _validate_pair(y_true, y_pred, None)
    return float((t == p).mean())


@dataclass
class ClassMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    support: int
    precision_defined: bool
    recall_defined: bool


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float, bool, bool]:
    p_den = tp + fp
    r_den = tp + fn
    precision = tp / p_den if p_den > 0 else 0.0
    recall = tp / r_den if r_den > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1, p_den > 0, r_den > 0


def precision_score(tp: int, fp: int) -> float:
    return _prf(tp, fp, 0)[0]


def recall_score(tp: int, fn: int) -> float:
    return _prf(tp, 0, fn)[1]


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def per_class_metrics(cm: ConfusionMatrix) -> list[ClassMetrics]:
    counts = cm.counts
    total = int(counts.sum())
    out = []
    for c in range(cm.n_classes):
        tp = int(counts[c, c])
        fn = int(counts[c].sum() - tp)
        fp = int(counts[:, c].sum() - tp)
        tn = total - tp - fn - fp
        precision, recall, f1, p_def, r_def = _prf(tp, fp, fn)
        out.append(
            ClassMetrics(
                tp=tp,
                fp=fp,
                fn=fn,
                tn=tn,
                precision=precision,
                recall=recall,
                f1=f1,
                support=tp + fn,
                precision_defined=p_def,
                recall_defined=r_def,
            )
        )
    return out


@dataclass
class AggregateMetrics:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float


def aggregate_metrics(cm: ConfusionMatrix) -> AggregateMetrics:
    per = per_class_metrics(cm)
    k = len(per)
    prec = np.array([m.precision for m in per])
    rec = np.array([m.recall for m in per])
    f1 = np.array([m.f1 for m in per])
    sup = np.array([m.support for m in per], dtype=np.float64)
    total = sup.sum()
    if total <= 0:
        raise ValueError("confusion matrix has no observations")
    w = sup / total
    acc = float(np.trace(cm.counts) / total)
    return AggregateMetrics(
        accuracy=acc,
        macro_precision=float(prec.sum() / k),
        macro_recall=float(rec.sum() / k),
        macro_f1=float(f1.sum() / k),
        weighted_precision=float((prec * w).sum()),
        weighted_recall=float((rec * w).sum()),
        weighted_f1=float((f1 * w).sum()),
    )


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


def roc_curve_binary(y_is_positive: np.ndarray, scores: np.ndarray) -> RocCurve:
    """ROC for one positive class against the rest.

    Points are appended per distinct score, scanning high scores first,
    so ties collapse into single diagonal steps.  AUC is the trapezoid
    area under the resulting curve.
    """
    pos = np.asarray(y_is_positive, dtype=bool)
    s = np.asarray(scores, dtype=np.float64)
    if pos.shape != s.shape or pos.ndim != 1:
        raise ValueError("labels and scores must be equal-length 1-D arrays")
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0:
        raise ValueError("ROC needs at least one positive example")
    if n_neg == 0:
        raise ValueError("ROC needs at least one negative example")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = pos[order]
    # indices where the score changes: the curve gets one vertex per distinct score
    distinct = np.flatnonzero(np.diff(s_sorted)) if s_sorted.size > 1 else np.array([], dtype=np.int64)
    cut = np.concatenate([distinct, [s_sorted.size - 1]])
    tp_cum = np.cumsum(pos_sorted)[cut]
    fp_cum = (cut + 1) - tp_cum
    tpr = np.concatenate([[0.0], tp_cum / n_pos])
    fpr = np.concatenate([[0.0], fp_cum / n_neg])
    thresholds = np.concatenate([[np.inf], s_sorted[cut]])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


def roc_one_vs_rest(y_true, proba: np.ndarray, n_classes: int | None = None) -> list[RocCurve]:
    t, classes, _ = as_label_ids(y_true, n_classes)
    P = np.asarray(proba, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != t.size:
        raise ValueError("proba must be (n_rows, n_classes) aligned to y_true")
    k = P.shape[1]
    if t.max() >= k:
        raise ValueError("label id outside [0, n_classes)")
    return [roc_curve_binary(t == c, P[:, c]) for c in range(k)]


@dataclass
class RocSummary:
    per_class: list[RocCurve]
    grid_fpr: np.ndarray
    macro_tpr: np.ndarray
    macro_auc: float
    micro: RocCurve


def roc_summary(y_true, proba: np.ndarray, n_classes: int | None = None) -> RocSummary:
    """Per-class one-vs-rest curves plus macro and micro averages.

    The macro curve interpolates every class curve onto a shared
    512-point false-positive grid and averages the interpolated true
    positive rates; the macro AUC is the mean of the per-class AUCs.
    The micro curve pools all (row, class) decisions into one binary
    problem.
    """
    curves = roc_one_vs_rest(y_true, proba, n_classes)
    grid = np.linspace(0.0, 1.0, ROC_GRID_POINTS)
    stack = np.stack([np.interp(grid, c.fpr, c.tpr) for c in curves])
    macro_tpr = stack.mean(axis=0)
    macro_auc = float(np.mean([c.auc for c in curves]))
    t, _, _ = as_label_ids(y_true, n_classes)
    P = np.asarray(proba, dtype=np.float64)
    k = P.shape[1]
    onehot = np.zeros((t.size, k), dtype=bool)
    onehot[np.arange(t.size), t] = True
    micro = roc_curve_binary(onehot.ravel(), P.ravel())
    return RocSummary(
        per_class=curves,
        grid_fpr=grid,
        macro_tpr=macro_tpr,
        macro_auc=macro_auc,
        micro=micro,
    )


@dataclass
class EvaluationReport:
    confusion: ConfusionMatrix
    per_class: list[ClassMetrics]
    aggregate: AggregateMetrics
    roc: RocSummary | None

    def to_dict(self) -> dict:
        d = {
            "accuracy": self.aggregate.accuracy,
            "macro": {
                "precision": self.aggregate.macro_precision,
                "recall": self.aggregate.macro_recall,
                "f1": self.aggregate.macro_f1,
            },
            "weighted": {
                "precision": self.aggregate.weighted_precision,
                "recall": self.aggregate.weighted_recall,
                "f1": self.aggregate.weighted_f1,
            },
            "per_class": [
                {
                    "name": self.confusion.class_names[i]
                    if self.confusion.class_names
                    else str(i),
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for i, m in enumerate(self.per_class)
            ],
        }
        if self.roc is not None:
            d["roc"] = {
                "macro_auc": self.roc.macro_auc,
                "micro_auc": self.roc.micro.auc,
                "per_class_auc": [c.auc for c in self.roc.per_class],
            }
        return d


def evaluate_predictions(
    y_true, y_pred, proba: np.ndarray | None = None, n_classes: int | None = None
) -> EvaluationReport:
    cm = confusion_matrix(y_true, y_pred, n_classes)
    roc = roc_summary(y_true, proba, n_classes) if proba is not None else None
    return EvaluationReport(
        confusion=cm,
        per_class=per_class_metrics(cm),
        aggregate=aggregate_metrics(cm),
        roc=roc,
    )
