"""Confusion matrix and accuracy/precision/recall/F1 with abstention accounting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .labels import CLASSES, Label


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed (gold, predicted) in ``CLASSES`` order.

    Rejected predictions are tallied in ``abstentions`` only.
    """

    counts: np.ndarray
    abstentions: int = 0

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.shape != (3, 3) or np.any(c < 0) or self.abstentions < 0:
            raise MetricsError("confusion counts must be a nonnegative 3x3 matrix")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def evaluated(self) -> int:
        return self.total + self.abstentions

    def cell(self, gold: Label, predicted: Label) -> int:
        return int(self.counts[CLASSES.index(gold), CLASSES.index(predicted)])


def confusion(predictions: Sequence[Optional[Label]], golds: Sequence[Label]) -> ConfusionMatrix:
    if len(predictions) != len(golds):
        raise MetricsError(f"length mismatch: {len(predictions)} predictions, {len(golds)} golds")
    if not golds:
        raise MetricsError("nothing to evaluate")
    counts = np.zeros((3, 3), dtype=np.int64)
    abstained = 0
    for pred, gold in zip(predictions, golds):
        if pred is None:
            abstained += 1
        else:
            counts[CLASSES.index(Label(gold)), CLASSES.index(Label(pred))] += 1
    return ConfusionMatrix(counts, abstained)


def f1_score(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: dict
    coverage: float
    matrix: ConfusionMatrix

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "coverage": self.coverage,
            "abstentions": self.matrix.abstentions,
            "evaluated": self.matrix.evaluated,
            "per_class": {c.value: vars(m) for c, m in self.per_class.items()},
            "confusion": {
                "order": [c.value for c in CLASSES],
                "counts": self.matrix.counts.tolist(),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self, model: str = "model") -> str:
        """Aligned text table: one summary row, then per-class rows."""
        width = max(14, len(model) + 2)
        head = f"{'Model':<{width}}{'Accuracy':>10}{'Precision':>11}{'Recall':>9}{'F1 Score':>10}{'Coverage':>10}"
        rows = [head,
                f"{model:<{width}}{self.accuracy * 100:>9.0f}%{self.macro_precision:>11.2f}"
                f"{self.macro_recall:>9.2f}{self.macro_f1:>10.2f}{self.coverage * 100:>9.0f}%"]
        for cls, m in self.per_class.items():
            rows.append(f"{'  ' + cls.value:<{width}}{'':>10}{m.precision:>11.2f}{m.recall:>9.2f}{m.f1:>10.2f}")
        return "\n".join(rows) + "\n"


def compute_metrics(matrix: ConfusionMatrix) -> MetricsReport:
    total = matrix.total
    if total == 0:
        raise MetricsError("confusion matrix is empty (every prediction abstained)")
    c = matrix.counts.astype(float)
    diag = np.diag(c)
    col = c.sum(axis=0)
    row = c.sum(axis=1)
    per_class = {}
    for k, cls in enumerate(CLASSES):
        p = diag[k] / col[k] if col[k] else 0.0
        r = diag[k] / row[k] if row[k] else 0.0
        per_class[cls] = ClassMetrics(float(p), float(r), f1_score(float(p), float(r)), int(row[k]))
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        macro_precision=float(np.mean([m.precision for m in per_class.values()])),
        macro_recall=float(np.mean([m.recall for m in per_class.values()])),
        macro_f1=float(np.mean([m.f1 for m in per_class.values()])),
        per_class=per_class,
        coverage=1.0 - matrix.abstentions / matrix.evaluated,
        matrix=matrix,
    )
