"""Euclidean nearest-neighbor matching and evaluation reporting.

A test vector is assigned the label of the closest training projection
under Euclidean distance; ties break to the lowest training index.
Evaluation accumulates a confusion matrix (rows = true class, columns =
predicted) and reports per-class and overall accuracy, truncated to two
decimals in the printed form while machine-readable output keeps full
precision.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pca import PcaModel


@dataclass(frozen=True)
class Prediction:
    predicted_label: str
    nearest_index: int
    distance: float


@dataclass
class ConfusionMatrix:
    classes: list[str]
    counts: np.ndarray  # (C, C) int64, rows true, columns predicted

    def row_total(self, i: int) -> int:
        return int(self.counts[i].sum())

    def recognized(self, i: int) -> int:
        return int(self.counts[i, i])

    def missed(self, i: int) -> int:
        return self.row_total(i) - self.recognized(i)

    def overall(self) -> tuple[int, int]:
        """(correct, total) across every class."""
        return int(np.trace(self.counts)), int(self.counts.sum())

    def per_class_accuracy(self, i: int) -> float:
        total = self.row_total(i)
        return self.recognized(i) / total if total else 0.0

    def overall_accuracy(self) -> float:
        correct, total = self.overall()
        return correct / total if total else 0.0


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def nearest(test_proj: np.ndarray, model: PcaModel) -> Prediction:
    """Label of the training projection closest to ``test_proj``.

    With a rank-zero model every distance is zero, so the tie-break to
    the lowest index decides.
    """
    if model.n_train < 1:
        raise ValueError("model holds no training projections")
    test_proj = np.asarray(test_proj, dtype=np.float64)
    if test_proj.shape != (model.n_components,):
        raise ValueError(
            f"expected a {model.n_components}-vector, got shape {test_proj.shape}"
        )
    deltas = model.train_projections - test_proj[:, None]
    distances = np.sqrt(np.sum(deltas**2, axis=0))
    idx = int(np.argmin(distances))
    return Prediction(model.labels[idx], idx, float(distances[idx]))


def classify(x: np.ndarray, model: PcaModel) -> Prediction:
    """Project a raw feature vector and match it in eigenspace.

    A rank-zero model carries no usable directions; the reported distance
    is then the raw distance from the training mean (all training vectors
    equal the mean in that case, so the lowest index wins).
    """
    if model.n_components == 0:
        if model.n_train < 1:
            raise ValueError("model holds no training projections")
        distance = euclidean(np.asarray(x, dtype=np.float64), model.mean)
        return Prediction(model.labels[0], 0, distance)
    return nearest(model.project(x), model)


def evaluate(
    predictions: Sequence[Prediction | str],
    truths: Sequence[str],
    classes: Sequence[str],
) -> ConfusionMatrix:
    """Accumulate (true, predicted) pairs into a confusion matrix."""
    if len(predictions) != len(truths):
        raise ValueError(
            f"{len(predictions)} predictions but {len(truths)} truths"
        )
    classes = list(classes)
    index = {label: i for i, label in enumerate(classes)}
    if len(index) != len(classes):
        raise ValueError("class list contains duplicates")
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for pred, truth in zip(predictions, truths):
        label = pred.predicted_label if isinstance(pred, Prediction) else pred
        if truth not in index:
            raise ValueError(f"unknown true label {truth!r}")
        if label not in index:
            raise ValueError(f"unknown predicted label {label!r}")
        counts[index[truth], index[label]] += 1
    return ConfusionMatrix(classes, counts)


def format_percent(numerator: int, denominator: int) -> str:
    """Accuracy as a percent string, truncated to two decimals.

    Whole percents print bare (100%, 0%); anything else keeps exactly two
    truncated decimals (23/36 prints as 63.88%). Truncation is done in
    integer arithmetic so formatting never rounds up.
    """
    if denominator == 0:
        return "0%"
    if numerator < 0 or denominator < 0:
        raise ValueError("counts must be nonnegative")
    hundredths = (10000 * numerator) // denominator
    if hundredths % 100 == 0:
        return f"{hundredths // 100}%"
    return f"{hundredths // 100}.{hundredths % 100:02d}%"


def confusion_csv(cm: ConfusionMatrix) -> str:
    """Counts as CSV: header of class names, one row per true class."""
    lines = ["true_class," + ",".join(cm.classes)]
    for i, label in enumerate(cm.classes):
        lines.append(label + "," + ",".join(str(v) for v in cm.counts[i]))
    return "\n".join(lines) + "\n"


def metrics_csv(cm: ConfusionMatrix) -> str:
    """Per-class and overall accuracy with full-precision values."""
    lines = ["class,recognized,missed,accuracy,accuracy_printed"]
    for i, label in enumerate(cm.classes):
        acc = cm.per_class_accuracy(i)
        printed = format_percent(cm.recognized(i), cm.row_total(i))
        lines.append(f"{label},{cm.recognized(i)},{cm.missed(i)},{acc!r},{printed}")
    correct, total = cm.overall()
    lines.append(
        f"overall,{correct},{total - correct},"
        f"{cm.overall_accuracy()!r},{format_percent(correct, total)}"
    )
    return "\n".join(lines) + "\n"


def confusion_table(cm: ConfusionMatrix) -> str:
    """Aligned text table: counts, Recognized / Missed / Accuracy columns,
    a Total row, and the Final Result line."""
    header = ["True \\ Predicted"] + cm.classes + ["Recognized", "Missed", "Accuracy"]
    rows = [header]
    for i, label in enumerate(cm.classes):
        rows.append(
            [label]
            + [str(v) for v in cm.counts[i]]
            + [
                str(cm.recognized(i)),
                str(cm.missed(i)),
                format_percent(cm.recognized(i), cm.row_total(i)),
            ]
        )
    correct, total = cm.overall()
    rows.append(
        ["Total"] + [""] * len(cm.classes) + [str(correct), str(total - correct), ""]
    )
    rows.append(
        ["Final Result"] + [""] * len(cm.classes)
        + [format_percent(correct, total), "", ""]
    )
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    out = io.StringIO()
    for row in rows:
        line = "  ".join(cell.ljust(w) for cell, w in zip(row, widths))
        out.write(line.rstrip() + "\n")
    return out.getvalue()
