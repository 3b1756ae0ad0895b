"""Sentiment class labels shared by the classifiers, ingestion and metrics."""

from __future__ import annotations

from enum import Enum


class Label(str, Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"

    def __str__(self) -> str:
        return self.value


# Canonical class order for every per-class array (priors, posteriors, matrices).
CLASSES: tuple[Label, ...] = (Label.NEGATIVE, Label.NEUTRAL, Label.POSITIVE)

# Serialized form of an abstention (a rejected classification is ``None`` in the API).
REJECTED = "rejected"


def parse_label(text: str) -> Label:
    try:
        return Label(text.strip().lower())
    except ValueError:
        raise ValueError(f"unknown label {text!r}; expected one of "
                         f"{', '.join(c.value for c in CLASSES)}") from None
