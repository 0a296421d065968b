"""Confusion counts and the metrics derived from them (class 1 = vessel = positive)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def accuracy_exact(self) -> Fraction:
        return Fraction(self.tp + self.tn, self.total) if self.total else Fraction(0)

    def swapped(self) -> "ConfusionMatrix":
        """Same counts seen with class 0 as the positive class."""
        return ConfusionMatrix(tp=self.tn, tn=self.tp, fp=self.fn, fn=self.fp)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    degenerate: bool  # some denominator was zero and its metric reported as 0


def _ratio(num: int, den: int) -> tuple[float, bool]:
    return (num / den, False) if den else (0.0, True)


def class_metrics(cm: ConfusionMatrix) -> ClassMetrics:
    precision, d1 = _ratio(cm.tp, cm.tp + cm.fp)
    recall, d2 = _ratio(cm.tp, cm.tp + cm.fn)
    # F1 = 2tp / (2tp + fp + fn), the harmonic mean written on counts
    f1, d3 = _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)
    return ClassMetrics(precision, recall, f1, d1 or d2 or d3)


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    vessel: ClassMetrics
    background: ClassMetrics

    @property
    def accuracy_percent(self) -> str:
        return f"{100 * self.accuracy:.2f}%"

    def to_dict(self) -> dict:
        r6 = lambda v: round(float(v), 6)  # noqa: E731
        cm = self.confusion
        return {
            "tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn,
            "accuracy": r6(self.accuracy),
            "class_1": {k: r6(getattr(self.vessel, k)) for k in ("precision", "recall", "f1")}
            | {"degenerate": self.vessel.degenerate},
            "class_0": {k: r6(getattr(self.background, k)) for k in ("precision", "recall", "f1")}
            | {"degenerate": self.background.degenerate},
        }


def confusion(truth, predicted) -> ConfusionMatrix:
    t = np.asarray(truth).ravel()
    p = np.asarray(predicted).ravel()
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.size} truth labels vs {p.size} predictions")
    if not (np.isin(t, (0, 1)).all() and np.isin(p, (0, 1)).all()):
        raise LengthMismatch("labels must be 0 or 1")
    t1, p1 = t == 1, p == 1
    return ConfusionMatrix(
        tp=int(np.count_nonzero(t1 & p1)),
        tn=int(np.count_nonzero(~t1 & ~p1)),
        fp=int(np.count_nonzero(~t1 & p1)),
        fn=int(np.count_nonzero(t1 & ~p1)),
    )


def report(cm: ConfusionMatrix) -> EvaluationReport:
    return EvaluationReport(cm, float(cm.accuracy_exact()), class_metrics(cm), class_metrics(cm.swapped()))


def evaluate(truth, predicted) -> EvaluationReport:
    return report(confusion(truth, predicted))


def dice(a, b) -> float:
    """``2|A & B| / (|A| + |B|)`` for masks or boolean arrays (1.0 when both are empty)."""
    A = np.asarray(a).astype(bool) if np.asarray(a).dtype == bool else np.asarray(a) == 255
    B = np.asarray(b).astype(bool) if np.asarray(b).dtype == bool else np.asarray(b) == 255
    total = A.sum() + B.sum()
    return 1.0 if total == 0 else float(2 * np.count_nonzero(A & B) / total)
