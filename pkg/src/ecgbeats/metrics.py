"""Confusion matrix and macro-averaged precision / recall / F1 / accuracy."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """K x K counts; rows are true classes, columns predicted classes."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValidationError(
            f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted"
        )
    for name, y in (("true", y_true), ("predicted", y_pred)):
        if y.size and (y.min() < 0 or y.max() >= n_classes):
            raise ValidationError(f"{name} label outside 0..{n_classes - 1}")
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def macro_metrics(cm: np.ndarray) -> tuple:
    """(precision, recall, f1, accuracy), macro-averaged over classes.

    A class with neither actual nor predicted positives contributes 0 to
    every macro average (conservative zero-division convention).
    """
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    if total == 0:
        raise ValidationError("empty confusion matrix")
    tp = np.diag(cm)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    accuracy = tp.sum() / total
    return float(precision.mean()), float(recall.mean()), float(f1.mean()), float(accuracy)


@dataclass
class ModelReport:
    name: str
    precision: float
    recall: float
    f1: float
    accuracy: float


def format_report(reports) -> str:
    """Aligned text table with the four macro metric columns."""
    header = ("Model", "Precision", "Recall", "Accuracy", "F1 score")
    rows = [(r.name, f"{r.precision:.4f}", f"{r.recall:.4f}",
             f"{r.accuracy:.4f}", f"{r.f1:.4f}") for r in reports]
    widths = [max(len(header[c]), *(len(row[c]) for row in rows)) if rows else len(header[c])
              for c in range(5)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def write_metrics_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "precision", "recall", "accuracy", "f1"])
        for r in reports:
            writer.writerow([r.name, f"{r.precision:.6f}", f"{r.recall:.6f}",
                             f"{r.accuracy:.6f}", f"{r.f1:.6f}"])


def read_metrics_csv(path):
    reports = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            reports.append(ModelReport(
                name=row["model"], precision=float(row["precision"]),
                recall=float(row["recall"]), f1=float(row["f1"]),
                accuracy=float(row["accuracy"])))
    return reports
