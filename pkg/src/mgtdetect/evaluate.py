"""Accuracy, confusion matrices, per-class scores and report rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


def _as_ids(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D sequence of class ids")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} must contain integer class ids")
    return arr.astype(np.int64)


def _check_pair(preds, golds):
    preds = _as_ids(preds, "preds")
    golds = _as_ids(golds, "golds")
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} gold labels")
    if len(preds) == 0:
        raise ValueError("cannot score an empty prediction list")
    return preds, golds


def accuracy(preds: Sequence[int], golds: Sequence[int]) -> float:
    preds, golds = _check_pair(preds, golds)
    return float(np.mean(preds == golds))


def confusion_matrix(preds: Sequence[int], golds: Sequence[int], n_classes: int) -> np.ndarray:
    """Counts with rows indexed by gold class and columns by predicted class."""
    preds = _as_ids(preds, "preds")
    golds = _as_ids(golds, "golds")
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} gold labels")
    for name, arr in (("prediction", preds), ("gold label", golds)):
        bad = (arr < 0) | (arr >= n_classes)
        if bad.any():
            raise ValueError(f"{name} class id {int(arr[bad][0])} outside 0..{n_classes - 1}")
    flat = np.bincount(golds * n_classes + preds, minlength=n_classes * n_classes)
    return flat.reshape(n_classes, n_classes)


@dataclass(frozen=True)
class ClassScores:
    name: str
    precision: float
    recall: float
    f1: float
    support: int
    # True where a denominator was zero and the score was set to 0 by convention
    undefined: bool = False


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    confusion: np.ndarray
    per_class: tuple
    n: int

    @property
    def class_names(self) -> list:
        return [c.name for c in self.per_class]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "n": self.n,
            "confusion": self.confusion.tolist(),
            "per_class": [
                {"name": c.name, "precision": c.precision, "recall": c.recall, "f1": c.f1}
                for c in self.per_class
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def report(self, title: Optional[str] = None) -> str:
        """Aligned plain-text table; ``*`` marks scores with a zero denominator."""
        width = max([len("class")] + [len(c.name) for c in self.per_class])
        lines = []
        if title:
            lines.append(title)
        lines.append(f"accuracy {self.accuracy:.4f}  (n={self.n})")
        lines.append("")
        lines.append(f"{'class':<{width}}  precision  recall      f1  support")
        for c in self.per_class:
            mark = "*" if c.undefined else " "
            lines.append(
                f"{c.name:<{width}}  {c.precision:9.4f}  {c.recall:6.4f}  {c.f1:6.4f}  {c.support:7d}{mark}"
            )
        if any(c.undefined for c in self.per_class):
            lines.append("* zero denominator; reported as 0")
        lines.append("")
        lines.append("confusion (rows = gold, cols = predicted)")
        names = self.class_names
        cell = max([len(str(int(v))) for v in self.confusion.ravel()] + [len(n) for n in names])
        lines.append(" " * (width + 2) + " ".join(f"{n:>{cell}}" for n in names))
        for name, row in zip(names, self.confusion):
            lines.append(f"{name:<{width}}  " + " ".join(f"{int(v):>{cell}}" for v in row))
        return "\n".join(lines) + "\n"


def metrics_from_predictions(preds, golds, class_names: Sequence[str]) -> Metrics:
    preds, golds = _check_pair(preds, golds)
    n_classes = len(class_names)
    cm = confusion_matrix(preds, golds, n_classes)
    per_class = []
    for c, name in enumerate(class_names):
        tp = int(cm[c, c])
        col = int(cm[:, c].sum())
        row = int(cm[c, :].sum())
        precision = tp / col if col else 0.0
        recall = tp / row if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(
            ClassScores(name, precision, recall, f1, row, undefined=(col == 0 or row == 0))
        )
    return Metrics(
        accuracy=float(np.trace(cm)) / len(preds),
        confusion=cm,
        per_class=tuple(per_class),
        n=len(preds),
    )


def evaluate(fp, ds) -> Metrics:
    """Score a fitted pipeline on a fully labelled dataset."""
    from mgtdetect.pipeline import pipeline_predict

    for doc in ds.documents:
        if doc.label is None:
            raise ValueError(f"document {doc.id!r} has no gold label")
    preds = pipeline_predict(fp, ds.texts)
    return metrics_from_predictions(preds, ds.labels, ds.scheme.class_names)
