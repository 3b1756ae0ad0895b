"""Valence-lexicon sentiment scoring and relevance-weighted aggregation.

A document's polarity is the summed valence of its lexicon hits squashed into
(-1, 1) with ``s / sqrt(s**2 + alpha)``. Document polarities are combined
per pair and window by a relevance-weighted mean.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Union

from .labels import Label

# Largest float below 1.0; polarity values are kept strictly inside (-1, 1).
_ONE_MINUS = math.nextafter(1.0, 0.0)


class LexiconError(ValueError):
    pass


class AggregationError(ValueError):
    pass


class Engine(str, Enum):
    LEXICON = "lexicon"
    NBAYES = "nbayes"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class LexiconConfig:
    alpha: float = 15.0
    pos_threshold: float = 0.05
    neg_threshold: float = -0.05

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.neg_threshold < 0 < self.pos_threshold:
            raise ValueError("thresholds must satisfy neg_threshold < 0 < pos_threshold")


@dataclass(frozen=True)
class SentimentScore:
    value: float
    engine: Engine = Engine.LEXICON

    def __post_init__(self):
        if not -1.0 < self.value < 1.0:
            raise ValueError(f"sentiment score must lie in (-1, 1), got {self.value}")
        object.__setattr__(self, "engine", Engine(self.engine))

    def __float__(self) -> float:
        return self.value


def clamp_open_unit(x: float) -> float:
    return max(-_ONE_MINUS, min(_ONE_MINUS, x))


class Lexicon(Mapping):
    """Immutable token -> valence map."""

    def __init__(self, entries: Union[Mapping[str, float], Iterable[tuple[str, float]]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        table: dict[str, float] = {}
        for token, valence in items:
            _check_entry(token, valence)
            if token in table:
                raise LexiconError(f"duplicate lexicon token {token!r}")
            table[token] = float(valence)
        self._table = MappingProxyType(table)

    def __getitem__(self, token: str) -> float:
        return self._table[token]

    def __iter__(self) -> Iterator[str]:
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def __repr__(self) -> str:
        return f"Lexicon({len(self)} entries)"


def _check_entry(token: str, valence: float) -> None:
    if not token or token != token.lower():
        raise LexiconError(f"lexicon token must be nonempty lowercase, got {token!r}")
    if not math.isfinite(valence):
        raise LexiconError(f"non-finite valence for {token!r}")


def load_lexicon(path: Union[str, Path, None] = None) -> Lexicon:
    """Load a ``token<TAB>valence`` file; ``None`` loads the bundled lexicon."""
    if path is None:
        text = resources.files("fxsignal").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
        where = "<bundled lexicon>"
    else:
        text = Path(path).read_text(encoding="utf-8")
        where = str(path)
    table: dict[str, float] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise LexiconError(f"{where}:{line_no}: expected token<TAB>valence")
        token = parts[0].strip()
        try:
            valence = float(parts[1])
        except ValueError:
            raise LexiconError(f"{where}:{line_no}: bad valence {parts[1]!r}") from None
        try:
            _check_entry(token, valence)
        except LexiconError as exc:
            raise LexiconError(f"{where}:{line_no}: {exc}") from None
        if token in table:
            raise LexiconError(f"{where}:{line_no}: duplicate lexicon token {token!r}")
        table[token] = valence
    return Lexicon(table)


def polarity_score(doc: Iterable[str], lexicon: Mapping[str, float],
                   config: LexiconConfig = LexiconConfig()) -> SentimentScore:
    """Normalized polarity of a token sequence (or ``ProcessedDoc``).

    Tokens missing from the lexicon contribute nothing; a document with no
    hits scores exactly 0.
    """
    hits = [lexicon[t] for t in doc if t in lexicon]
    if not hits:
        return SentimentScore(0.0, Engine.LEXICON)
    s = math.fsum(hits)
    return SentimentScore(clamp_open_unit(s / math.sqrt(s * s + config.alpha)), Engine.LEXICON)


def classify_polarity(score: Union[SentimentScore, float], config: LexiconConfig = LexiconConfig()) -> Label:
    value = float(score)
    if value >= config.pos_threshold:
        return Label.POSITIVE
    if value <= config.neg_threshold:
        return Label.NEGATIVE
    return Label.NEUTRAL


def aggregate_sentiment(scored: Iterable[tuple[SentimentScore, float]]) -> SentimentScore:
    """Relevance-weighted mean of document scores.

    The result is clipped into [min, max] of the inputs, which the exact mean
    always satisfies but floating-point division may miss by an ulp.
    """
    values, weights, engines = [], [], set()
    for score, weight in scored:
        if not (weight > 0 and math.isfinite(weight)):
            raise AggregationError(f"weights must be positive, got {weight}")
        values.append(score.value)
        weights.append(float(weight))
        engines.add(score.engine)
    if not values:
        raise AggregationError("no documents in window")
    if len(engines) > 1:
        raise AggregationError(f"mixed engine tags: {sorted(e.value for e in engines)}")
    mean = math.fsum(v * w for v, w in zip(values, weights)) / math.fsum(weights)
    mean = min(max(mean, min(values)), max(values))
    return SentimentScore(mean, engines.pop())
