"""
Confusion matrices, one-vs-rest precision/recall, accuracy and the
decision-maker weight W = P + R + A.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.common.error_categorization import CommitteeError


class AccuracyMode(Enum):
    """How the per-class accuracy vector is filled."""
    OVERALL = "overall"  # overall accuracy replicated per class
    OVR = "ovr"          # (TP + TN) / n of each class's one-vs-rest collapse


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """m x m counts, rows = true class, columns = predicted class."""
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise CommitteeError(f"confusion matrix must be square, got shape {counts.shape}")
        if np.any(counts < 0):
            raise CommitteeError("confusion matrix counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])


@dataclass(frozen=True, eq=False)
class PerClassMetrics:
    """Per-class precision, recall and accuracy vectors of one learner."""
    precision: np.ndarray
    recall: np.ndarray
    accuracy: np.ndarray

    def __post_init__(self):
        for name in ("precision", "recall", "accuracy"):
            value = np.array(getattr(self, name), dtype=np.float64, copy=True)
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if not (self.precision.shape == self.recall.shape == self.accuracy.shape):
            raise CommitteeError("precision, recall and accuracy must have the same length")
        stacked = np.concatenate([self.precision, self.recall, self.accuracy])
        if np.any(~np.isfinite(stacked)) or np.any(stacked < 0.0) or np.any(stacked > 1.0):
            raise CommitteeError("metrics must lie in [0, 1]")

    @property
    def n_classes(self) -> int:
        return int(self.precision.shape[0])


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Per-class decision-maker weight."""
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64, copy=True)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n_classes(self) -> int:
        return int(self.w.shape[0])


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int], n_classes: int) -> ConfusionMatrix:
    """
    Count true-vs-predicted pairs.

    Raises:
        CommitteeError: length mismatch, empty input or label out of range
    """
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise CommitteeError(f"length mismatch: {t.shape} true vs {p.shape} predicted labels")
    if t.size == 0:
        raise CommitteeError("confusion matrix needs at least one label")
    for name, labels in (("true", t), ("predicted", p)):
        if labels.min() < 0 or labels.max() >= n_classes:
            raise CommitteeError(f"{name} label out of range for {n_classes} classes")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


def _check_class(cm: ConfusionMatrix, c: int) -> None:
    if not 0 <= c < cm.n_classes:
        raise CommitteeError(f"class index {c} out of range for {cm.n_classes} classes")


def ovr_collapse(cm: ConfusionMatrix, c: int) -> Tuple[int, int, int, int]:
    """(TP, FP, FN, TN) with class c positive and every other class negative."""
    _check_class(cm, c)
    counts = cm.counts
    tp = int(counts[c, c])
    fp = int(counts[:, c].sum()) - tp
    fn = int(counts[c, :].sum()) - tp
    tn = cm.n - tp - fp - fn
    return tp, fp, fn, tn


def precision(cm: ConfusionMatrix, c: int) -> float:
    """TP / (TP + FP); 0 when class c is never predicted."""
    tp, fp, _, _ = ovr_collapse(cm, c)
    return tp / (tp + fp) if tp + fp > 0 else 0.0


def recall(cm: ConfusionMatrix, c: int) -> float:
    """TP / (TP + FN); 0 when class c never occurs."""
    tp, _, fn, _ = ovr_collapse(cm, c)
    return tp / (tp + fn) if tp + fn > 0 else 0.0


def accuracy(cm: ConfusionMatrix) -> float:
    """trace / n."""
    if cm.n < 1:
        raise CommitteeError("accuracy of an empty confusion matrix is undefined")
    return int(np.trace(cm.counts)) / cm.n


def ovr_accuracy(cm: ConfusionMatrix, c: int) -> float:
    tp, fp, fn, tn = ovr_collapse(cm, c)
    return (tp + tn) / (tp + fp + fn + tn)


def per_class_metrics(cm: ConfusionMatrix, mode: AccuracyMode = AccuracyMode.OVERALL) -> PerClassMetrics:
    m = cm.n_classes
    if mode is AccuracyMode.OVR:
        acc = [ovr_accuracy(cm, c) for c in range(m)]
    else:
        acc = [accuracy(cm)] * m
    return PerClassMetrics(
        precision=np.array([precision(cm, c) for c in range(m)]),
        recall=np.array([recall(cm, c) for c in range(m)]),
        accuracy=np.array(acc),
    )


def learner_weights(pm: PerClassMetrics) -> WeightVector:
    """W = P + R + A elementwise, evaluated in that order."""
    return WeightVector((pm.precision + pm.recall) + pm.accuracy)


def metrics_rows(
    learner: str, pm: PerClassMetrics, weights: WeightVector, class_names: Sequence[str]
) -> List[Dict[str, Any]]:
    """Flat rows (learner, class, precision, recall, accuracy, weight)."""
    return [
        {
            "learner": learner,
            "class": class_names[i],
            "precision": float(pm.precision[i]),
            "recall": float(pm.recall[i]),
            "accuracy": float(pm.accuracy[i]),
            "weight": float(weights.w[i]),
        }
        for i in range(pm.n_classes)
    ]


METRICS_CSV_HEADER = ("learner", "class", "precision", "recall", "accuracy", "weight")


def format_metrics_csv(rows: Iterable[Dict[str, Any]], extra_columns: Sequence[str] = ()) -> str:
    """CSV text, one row per learner and class; floats written with round-trip repr."""
    header = list(extra_columns) + list(METRICS_CSV_HEADER)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k]) for k in header))
    return "\n".join(lines) + "\n"
