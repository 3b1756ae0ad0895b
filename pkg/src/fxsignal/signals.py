"""Fusion of windowed sentiment with SMA/RSI confirmation into graded signals.

A Buy needs bullish sentiment, close above its SMA and RSI above 50; a Sell
needs the mirror image. Anything short of full alignment, including exact
equality at either confirmation boundary, yields no signal.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterable, Optional, Sequence

from .indicators import rsi, sma
from .ingest import PriceSeries, format_timestamp, parse_timestamp
from .lexicon import SentimentScore, aggregate_sentiment

SIGNAL_HEADER = ("timestamp", "pair", "direction", "strength", "sentiment",
                 "close", "sma", "rsi", "doc_count")


class SignalFormatError(ValueError):
    pass


class Direction(str, Enum):
    BUY = "buy"
    SELL = "sell"
    NONE = "none"

    def __str__(self) -> str:
        return self.value

    @property
    def opposite(self) -> "Direction":
        return {Direction.BUY: Direction.SELL, Direction.SELL: Direction.BUY}.get(self, Direction.NONE)


class Strength(str, Enum):
    NORMAL = "normal"
    STRONG = "strong"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FusionConfig:
    pos_threshold: float = 0.05
    neg_threshold: float = -0.05
    strong_threshold: float = 0.5
    sentiment_window: timedelta = timedelta(hours=24)
    min_docs: int = 1

    def __post_init__(self):
        if not 0 < self.pos_threshold < self.strong_threshold <= 1:
            raise ValueError("thresholds must satisfy 0 < pos_threshold < strong_threshold <= 1")
        if not self.neg_threshold < 0:
            raise ValueError("neg_threshold must be negative")
        if self.sentiment_window <= timedelta(0):
            raise ValueError("sentiment_window must be positive")
        if self.min_docs < 0:
            raise ValueError("min_docs must be nonnegative")


@dataclass(frozen=True)
class SignalContext:
    timestamp: datetime
    pair: str
    sentiment: Optional[SentimentScore]
    close: float
    sma_value: float
    rsi_value: float
    doc_count: int = 0

    def __post_init__(self):
        if not (self.close > 0 and self.sma_value > 0):
            raise ValueError("close and sma_value must be positive")
        if not 0.0 <= self.rsi_value <= 100.0:
            raise ValueError(f"rsi_value outside [0, 100]: {self.rsi_value}")
        if self.doc_count < 0:
            raise ValueError("doc_count must be nonnegative")


@dataclass(frozen=True)
class Rationale:
    """Which of the three conditions agreed with the sentiment's direction."""

    sentiment: bool
    trend: bool
    momentum: bool

    @property
    def aligned(self) -> bool:
        return self.sentiment and self.trend and self.momentum


@dataclass(frozen=True)
class TradingSignal:
    direction: Direction = Direction.NONE
    strength: Optional[Strength] = None
    rationale: Optional[Rationale] = None

    def __post_init__(self):
        if self.direction is Direction.NONE and self.strength is not None:
            raise ValueError("a non-signal carries no strength")
        if self.direction is not Direction.NONE and self.strength is None:
            raise ValueError("a directional signal needs a strength")


NO_SIGNAL = TradingSignal()


def generate_signal(ctx: SignalContext, config: FusionConfig = FusionConfig()) -> TradingSignal:
    if ctx.sentiment is None or ctx.doc_count == 0 or ctx.doc_count < config.min_docs:
        return TradingSignal(rationale=Rationale(False, False, False))
    s = ctx.sentiment.value
    if s >= config.pos_threshold:
        why = Rationale(True, ctx.close > ctx.sma_value, ctx.rsi_value > 50.0)
        direction = Direction.BUY
    elif s <= config.neg_threshold:
        why = Rationale(True, ctx.close < ctx.sma_value, ctx.rsi_value < 50.0)
        direction = Direction.SELL
    else:
        return TradingSignal(rationale=Rationale(False, False, False))
    if not why.aligned:
        return TradingSignal(rationale=why)
    strength = Strength.STRONG if abs(s) >= config.strong_threshold else Strength.NORMAL
    return TradingSignal(direction, strength, why)


# ---------------------------------------------------------------------------
# per-bar evaluation


@dataclass(frozen=True)
class ScoredDoc:
    timestamp: datetime
    score: SentimentScore
    weight: float = 1.0


@dataclass(frozen=True)
class BarSignal:
    timestamp: datetime
    pair: str
    signal: TradingSignal
    sentiment: Optional[float]
    close: float
    sma: Optional[float]
    rsi: Optional[float]
    doc_count: int


class SentimentWindow:
    """Weighted sentiment over documents stamped in ``[end - width, end)``."""

    def __init__(self, docs: Iterable[ScoredDoc], width: timedelta):
        self.docs = sorted(docs, key=lambda d: d.timestamp)
        self._times = [d.timestamp for d in self.docs]
        self.width = width

    def at(self, end: datetime) -> tuple[Optional[SentimentScore], int]:
        lo = bisect.bisect_left(self._times, end - self.width)
        hi = bisect.bisect_left(self._times, end)
        window = self.docs[lo:hi]
        if not window:
            return None, 0
        return aggregate_sentiment((d.score, d.weight) for d in window), len(window)


def build_bar_signals(series: PriceSeries, docs: Iterable[ScoredDoc],
                      config: FusionConfig = FusionConfig(),
                      sma_period: int = 50, rsi_period: int = 14) -> list[BarSignal]:
    """Evaluate the fusion rule at every bar close; warm-up bars get no signal."""
    closes = series.closes
    sma_s = sma(closes, sma_period)
    rsi_s = rsi(closes, rsi_period)
    window = SentimentWindow(docs, config.sentiment_window)

    out = []
    for i, bar in enumerate(series.bars):
        sentiment, count = window.at(bar.date)
        sma_v, rsi_v = sma_s.at(i), rsi_s.at(i)
        if sma_v is None or rsi_v is None:
            signal = NO_SIGNAL
        else:
            ctx = SignalContext(bar.date, series.pair, sentiment, bar.close, sma_v, rsi_v, count)
            signal = generate_signal(ctx, config)
        out.append(BarSignal(bar.date, series.pair, signal,
                             None if sentiment is None else sentiment.value,
                             bar.close, sma_v, rsi_v, count))
    return out


# ---------------------------------------------------------------------------
# CSV


def _num(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def write_signals_csv(rows: Iterable[BarSignal], out: io.TextIOBase) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SIGNAL_HEADER)
    for r in sorted(rows, key=lambda r: (r.pair, r.timestamp)):
        w.writerow([format_timestamp(r.timestamp), r.pair, r.signal.direction.value,
                    r.signal.strength.value if r.signal.strength else "",
                    _num(r.sentiment), _num(r.close), _num(r.sma), _num(r.rsi), r.doc_count])


def format_signals_csv(rows: Iterable[BarSignal]) -> str:
    buf = io.StringIO()
    write_signals_csv(rows, buf)
    return buf.getvalue()


def _opt_float(cell: str, row_no: int, name: str) -> Optional[float]:
    if not cell.strip():
        return None
    try:
        v = float(cell)
    except ValueError:
        raise SignalFormatError(f"bad {name} {cell!r} at row {row_no}") from None
    if not math.isfinite(v):
        raise SignalFormatError(f"bad {name} {cell!r} at row {row_no}")
    return v


def parse_signals_csv(text: str) -> list[BarSignal]:
    """Read a signals CSV back. Rationales are not stored, so they come back as ``None``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != SIGNAL_HEADER:
        raise SignalFormatError(f"bad signals header; expected {','.join(SIGNAL_HEADER)!r}")
    rows = []
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(SIGNAL_HEADER):
            raise SignalFormatError(f"expected {len(SIGNAL_HEADER)} fields at row {row_no}")
        ts, pair, direction, strength, sent, close, sma_v, rsi_v, count = row
        try:
            sig = TradingSignal(Direction(direction), Strength(strength) if strength else None)
            stamp = parse_timestamp(ts)
            n = int(count)
        except ValueError as exc:
            raise SignalFormatError(f"row {row_no}: {exc}") from None
        close_v = _opt_float(close, row_no, "close")
        if close_v is None:
            raise SignalFormatError(f"missing close at row {row_no}")
        rows.append(BarSignal(stamp, pair, sig, _opt_float(sent, row_no, "sentiment"), close_v,
                              _opt_float(sma_v, row_no, "sma"), _opt_float(rsi_v, row_no, "rsi"), n))
    return rows


def signal_pairs(rows: Sequence[BarSignal]) -> list[tuple[datetime, TradingSignal]]:
    return [(r.timestamp, r.signal) for r in rows]
