"""Evaluation metrics: accuracy@K, precision/recall/F, Cohen's kappa."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import DataError
from .ranking import RankedList

__all__ = [
    "ConfusionCounts",
    "MetricReport",
    "accuracy_at_k",
    "prf",
    "cohen_kappa",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class MetricReport:
    """Whatever subset of metrics a command produced; serializes to text/JSON."""

    accuracy_at_k: dict[int, float] = field(default_factory=dict)
    precision: float | None = None
    recall: float | None = None
    f_measure: float | None = None
    kappa: float | None = None

    def to_text(self) -> str:
        lines = []
        for k in sorted(self.accuracy_at_k):
            lines.append(f"accuracy@{k}={self.accuracy_at_k[k]:.6f}")
        for name in ("precision", "recall", "f_measure", "kappa"):
            value = getattr(self, name)
            if value is not None:
                lines.append(f"{name}={value:.6f}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload: dict[str, object] = {}
        if self.accuracy_at_k:
            payload["accuracy_at_k"] = {str(k): self.accuracy_at_k[k] for k in sorted(self.accuracy_at_k)}
        for name in ("precision", "recall", "f_measure", "kappa"):
            value = getattr(self, name)
            if value is not None:
                payload[name] = value
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def accuracy_at_k(ranked: RankedList, labels: Mapping[str, bool], k: int) -> float:
    """Fraction of the top-k ranked tweets whose label is relevant."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(ranked.entries):
        raise DataError(f"ranked list has {len(ranked.entries)} entries, cannot take top {k}")
    hits = 0
    for tweet_id, _ in ranked.entries[:k]:
        if tweet_id not in labels:
            raise DataError(f"no label for tweet id {tweet_id!r}")
        hits += bool(labels[tweet_id])
    return hits / k


def prf(counts: ConfusionCounts) -> MetricReport:
    """Precision, recall and F-measure; zero denominators give 0.0."""
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f_measure = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricReport(precision=precision, recall=recall, f_measure=f_measure)


def cohen_kappa(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """Two-rater agreement corrected for chance.

    Internally exact (rational arithmetic), converted to float once at the
    end.  When expected agreement is 1, returns 1.0 for perfect observed
    agreement and 0.0 otherwise.
    """
    n = len(labels_a)
    if n != len(labels_b):
        raise ValueError(f"label lists differ in length: {n} vs {len(labels_b)}")
    if n == 0:
        raise ValueError("label lists are empty")
    observed = Fraction(sum(a == b for a, b in zip(labels_a, labels_b)), n)
    categories = set(labels_a) | set(labels_b)
    expected = Fraction(0)
    for c in categories:
        margin_a = Fraction(sum(a == c for a in labels_a), n)
        margin_b = Fraction(sum(b == c for b in labels_b), n)
        expected += margin_a * margin_b
    if expected == 1:
        return 1.0 if observed == 1 else 0.0
    return float((observed - expected) / (1 - expected))
