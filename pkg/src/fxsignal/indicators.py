"""Simple moving average and Wilder RSI over close prices."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class InsufficientHistory(ValueError):
    pass


class IndicatorKind(str, Enum):
    SMA = "SMA"
    RSI = "RSI"


@dataclass(frozen=True)
class IndicatorSeries:
    """Indicator values aligned 1:1 with the input bars.

    ``values[i]`` is NaN for ``i < first``; ``timestamps`` is optional.
    """

    kind: IndicatorKind
    period: int
    values: np.ndarray
    first: int
    timestamps: Optional[tuple[datetime, ...]] = None

    @property
    def defined(self) -> np.ndarray:
        return self.values[self.first:]

    def at(self, i: int) -> Optional[float]:
        return None if i < self.first else float(self.values[i])

    def __len__(self) -> int:
        return len(self.values)


def _check(closes: Sequence[float], period: int, needed: int) -> np.ndarray:
    if int(period) != period or period < 1:
        raise ValueError(f"period must be a positive integer, got {period}")
    c = np.asarray(closes, dtype=float)
    if c.ndim != 1:
        raise ValueError("closes must be one-dimensional")
    if len(c) < needed:
        raise InsufficientHistory(f"insufficient history: {len(c)} closes, need {needed}")
    return c


def sma(closes: Sequence[float], period: int,
        timestamps: Optional[Sequence[datetime]] = None) -> IndicatorSeries:
    c = _check(closes, period, period)
    out = np.full(len(c), np.nan)
    out[period - 1:] = sliding_window_view(c, period).mean(axis=1)
    return IndicatorSeries(IndicatorKind.SMA, period, out, period - 1,
                           tuple(timestamps) if timestamps is not None else None)


def _rsi_value(avg_gain: float, avg_loss: float) -> float:
    if avg_loss == 0.0:
        return 50.0 if avg_gain == 0.0 else 100.0
    if avg_gain == 0.0:
        return 0.0
    return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)


def rsi(closes: Sequence[float], period: int = 14,
        timestamps: Optional[Sequence[datetime]] = None) -> IndicatorSeries:
    """Wilder RSI. The first value sits at index ``period``.

    Averages are seeded with the plain mean of the first ``period`` moves and
    then smoothed as ``(prev * (period - 1) + current) / period``.
    """
    c = _check(closes, period, period + 1)
    delta = np.diff(c)
    gains = np.where(delta > 0, delta, 0.0)
    losses = np.where(delta < 0, -delta, 0.0)

    out = np.full(len(c), np.nan)
    avg_gain = float(gains[:period].mean())
    avg_loss = float(losses[:period].mean())
    out[period] = _rsi_value(avg_gain, avg_loss)
    for i in range(period, len(delta)):
        avg_gain = (avg_gain * (period - 1) + gains[i]) / period
        avg_loss = (avg_loss * (period - 1) + losses[i]) / period
        out[i + 1] = _rsi_value(avg_gain, avg_loss)
    return IndicatorSeries(IndicatorKind.RSI, period, out, period,
                           tuple(timestamps) if timestamps is not None else None)
