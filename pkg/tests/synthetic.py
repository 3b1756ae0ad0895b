"""Seeded synthetic worlds: H4 prices with news-led drifts, plus labeled headlines.

Positive bursts of news are published during bar ``e`` and the price drifts up
over the following bars (mirror image for negative news). Background chatter
uses words that carry no lexicon valence.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from fxsignal.ingest import Candle, NewsRecord, PriceSeries, Timeframe, write_news_csv, write_ohlc_csv
from fxsignal.labels import Label

POSITIVE_WORDS = ("strong", "gains", "optimistic", "growth", "robust", "boost", "great", "good")
NEGATIVE_WORDS = ("weak", "crisis", "fear", "recession", "losses", "worries", "risk", "loss")
NEUTRAL_WORDS = ("dollar", "federal", "officials", "statement", "thursday", "markets", "session",
                 "currency", "analysts", "minutes", "figures", "release", "quarter", "traders")

H4 = timedelta(hours=4)
START = datetime(2023, 4, 3, tzinfo=timezone.utc)


@dataclass
class World:
    series: PriceSeries
    news: list[NewsRecord]
    events: list[tuple[int, int]]  # (bar index, +1/-1)

    def news_csv(self) -> bytes:
        buf = io.StringIO()
        write_news_csv(self.news, buf)
        return buf.getvalue().encode("utf-8")

    def prices_csv(self) -> bytes:
        buf = io.StringIO()
        write_ohlc_csv(self.series, buf)
        return buf.getvalue().encode("utf-8")


def headline(rng: np.random.Generator, label: Label) -> str:
    filler = list(rng.choice(NEUTRAL_WORDS, size=4))
    if label is Label.POSITIVE:
        cue = list(rng.choice(POSITIVE_WORDS, size=3, replace=False))
    elif label is Label.NEGATIVE:
        cue = list(rng.choice(NEGATIVE_WORDS, size=3, replace=False))
    else:
        cue = list(rng.choice(NEUTRAL_WORDS, size=3))
    words = filler + cue
    rng.shuffle(words)
    return "Dollar " + " ".join(words) + "!"


def make_world(seed: int, n_bars: int = 640, n_events: int = 8, pair: str = "EURUSD",
               noise: float = 0.0008, drift: float = 0.0006, drift_bars: int = 18,
               background_per_bar: float = 0.3) -> World:
    rng = np.random.default_rng(seed)
    spacing = (n_bars - 80) // n_events
    events = []
    for k in range(n_events):
        e = 60 + k * spacing + int(rng.integers(0, spacing // 3))
        events.append((e, 1 if rng.random() < 0.5 else -1))

    rets = rng.normal(0.0, noise, size=n_bars)
    for e, sign in events:
        rets[e + 1:e + 1 + drift_bars] += sign * drift

    bars = []
    prev_close = 1.10
    for i in range(n_bars):
        open_ = prev_close
        close = open_ * float(np.exp(rets[i]))
        wick = np.abs(rng.normal(0.0, noise / 2, size=2))
        high = max(open_, close) * (1 + wick[0])
        low = min(open_, close) * (1 - wick[1])
        bars.append(Candle(START + i * H4, round(open_, 6), round(high, 6), round(low, 6), round(close, 6)))
        prev_close = close
    series = PriceSeries(pair, Timeframe.H4, tuple(bars))

    news = []
    for e, sign in events:
        label = Label.POSITIVE if sign > 0 else Label.NEGATIVE
        for _ in range(3):
            minute = int(rng.integers(1, 240))
            ts = START + e * H4 - timedelta(minutes=minute)
            news.append(NewsRecord(ts, "wire", pair, 1.0, headline(rng, label), label))
    for i in range(n_bars):
        if rng.random() < background_per_bar:
            ts = START + i * H4 - timedelta(minutes=int(rng.integers(1, 240)))
            news.append(NewsRecord(ts, "social", pair, 0.5, headline(rng, Label.NEUTRAL), Label.NEUTRAL))
    news.sort(key=lambda r: r.timestamp)
    return World(series, news, events)


def labeled_corpus(seed: int, per_class: int = 30) -> list[tuple[str, Label]]:
    rng = np.random.default_rng(seed)
    out = []
    for label in (Label.NEGATIVE, Label.NEUTRAL, Label.POSITIVE):
        out += [(headline(rng, label), label) for _ in range(per_class)]
    return out
