"""Single-position bar replay of trading signals with slippage and fees.

A signal observed at a bar's close is filled at the next bar's open. Fills at
a bar's open are stamped with the preceding bar's close time (the instant the
open prints), so every trade satisfies ``exit_time > entry_time``.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .ingest import PriceSeries, format_timestamp
from .signals import Direction, TradingSignal


class BacktestError(ValueError):
    pass


class Side(str, Enum):
    LONG = "long"
    SHORT = "short"


class ExitReason(str, Enum):
    OPPOSITE_SIGNAL = "opposite_signal"
    MAX_HOLD = "max_hold"
    END_OF_DATA = "end_of_data"


@dataclass(frozen=True)
class BacktestConfig:
    slippage_per_side: float = 0.0
    max_hold_bars: int = 42
    fee_per_side: float = 0.0

    def __post_init__(self):
        if self.slippage_per_side < 0:
            raise ValueError("slippage_per_side must be nonnegative")
        if self.fee_per_side < 0:
            raise ValueError("fee_per_side must be nonnegative")
        if int(self.max_hold_bars) != self.max_hold_bars or self.max_hold_bars < 1:
            raise ValueError("max_hold_bars must be a positive integer")


@dataclass(frozen=True)
class Trade:
    direction: Side
    entry_time: datetime
    entry_price: float
    exit_time: datetime
    exit_price: float
    return_frac: float
    exit_reason: ExitReason

    def to_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "entry_time": format_timestamp(self.entry_time),
            "entry_price": self.entry_price,
            "exit_time": format_timestamp(self.exit_time),
            "exit_price": self.exit_price,
            "return_frac": self.return_frac,
            "exit_reason": self.exit_reason.value,
        }


@dataclass(frozen=True)
class BacktestReport:
    pair: str
    trades: tuple[Trade, ...]
    cumulative_return_frac: float
    win_rate: float
    max_drawdown_frac: float
    equity_curve: tuple[tuple[datetime, float], ...]
    config: BacktestConfig = BacktestConfig()
    diagnostics: dict = field(default_factory=dict)

    @property
    def trade_count(self) -> int:
        return len(self.trades)

    def to_dict(self) -> dict:
        return {
            "pair": self.pair,
            "config": {
                "slippage_per_side": self.config.slippage_per_side,
                "max_hold_bars": self.config.max_hold_bars,
                "fee_per_side": self.config.fee_per_side,
            },
            "trade_count": self.trade_count,
            "cumulative_return_frac": self.cumulative_return_frac,
            "win_rate": self.win_rate,
            "max_drawdown_frac": self.max_drawdown_frac,
            "diagnostics": dict(sorted(self.diagnostics.items())),
            "trades": [t.to_dict() for t in self.trades],
            "equity_curve": [[format_timestamp(t), e] for t, e in self.equity_curve],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"Backtest {self.pair}",
            f"  trades            {self.trade_count}",
            f"  cumulative return {self.cumulative_return_frac * 100:+.4f}%",
            f"  win rate          {self.win_rate * 100:.2f}%",
            f"  max drawdown      {self.max_drawdown_frac * 100:.4f}%",
            f"  slippage/side     {self.config.slippage_per_side}",
            f"  fee/side          {self.config.fee_per_side}",
            f"  max hold (bars)   {self.config.max_hold_bars}",
        ]
        for key, value in sorted(self.diagnostics.items()):
            lines.append(f"  {key:<17} {value}")
        if self.trades:
            lines.append("")
            lines.append(f"  {'side':<6}{'entry time':<22}{'entry':>10}  {'exit time':<22}{'exit':>10}"
                         f"{'return %':>11}  reason")
            for t in self.trades:
                lines.append(f"  {t.direction.value:<6}{format_timestamp(t.entry_time):<22}{t.entry_price:>10.5f}"
                             f"  {format_timestamp(t.exit_time):<22}{t.exit_price:>10.5f}"
                             f"{t.return_frac * 100:>+11.4f}  {t.exit_reason.value}")
        return "\n".join(lines) + "\n"

    def equity_csv(self) -> str:
        buf = io.StringIO()
        buf.write("timestamp,equity\n")
        for t, e in self.equity_curve:
            buf.write(f"{format_timestamp(t)},{e!r}\n")
        return buf.getvalue()


def trade_return(side: Side, entry: float, exit_: float, fee_per_side: float = 0.0) -> float:
    if side is Side.LONG:
        return (exit_ - entry) / entry - 2.0 * fee_per_side
    return (entry - exit_) / entry - 2.0 * fee_per_side


SignalInput = Union[Mapping[datetime, TradingSignal], Iterable[tuple[datetime, TradingSignal]]]


def run_backtest(series: PriceSeries, signals: SignalInput,
                 config: BacktestConfig = BacktestConfig()) -> BacktestReport:
    bars = series.bars
    index = {b.date: i for i, b in enumerate(bars)}
    items = signals.items() if isinstance(signals, Mapping) else signals
    at_bar: dict[int, Direction] = {}
    for ts, sig in items:
        i = index.get(ts)
        if i is None:
            raise BacktestError(f"signal at {format_timestamp(ts)} has no matching bar in {series.pair}")
        if sig.direction is not Direction.NONE:
            at_bar[i] = sig.direction

    slip = config.slippage_per_side
    diagnostics = {"ignored_same_direction": 0, "ignored_no_next_bar": 0}
    trades: list[Trade] = []
    side: Optional[Side] = None
    entry_i = entry_price = 0
    pending_entry: Optional[Side] = None
    pending_exit = False

    def close_position(i: int, price: float, when: datetime, reason: ExitReason) -> None:
        nonlocal side
        fill = price - slip if side is Side.LONG else price + slip
        entry_time = bars[entry_i - 1].date
        r = trade_return(side, entry_price, fill, config.fee_per_side)
        trades.append(Trade(side, entry_time, entry_price, when, fill, r, reason))
        side = None

    for i, bar in enumerate(bars):
        # fills at this bar's open
        if side is not None and (pending_exit or i - entry_i >= config.max_hold_bars):
            reason = ExitReason.OPPOSITE_SIGNAL if pending_exit else ExitReason.MAX_HOLD
            close_position(i, bar.open, bars[i - 1].date, reason)
            pending_exit = False
        if pending_entry is not None and side is None:
            side = pending_entry
            entry_i = i
            entry_price = bar.open + slip if side is Side.LONG else bar.open - slip
        pending_entry = None

        # signal observed at this bar's close
        direction = at_bar.get(i)
        if direction is None:
            continue
        wanted = Side.LONG if direction is Direction.BUY else Side.SHORT
        if i + 1 >= len(bars):
            diagnostics["ignored_no_next_bar"] += 1
        elif side is None:
            pending_entry = wanted
        elif side is wanted:
            diagnostics["ignored_same_direction"] += 1
        else:
            pending_exit = True

    if side is not None:
        close_position(len(bars) - 1, bars[-1].close, bars[-1].date, ExitReason.END_OF_DATA)

    equity = 1.0
    curve = [(bars[0].date, 1.0)] if bars else []
    peak, max_dd = 1.0, 0.0
    for t in trades:
        equity *= 1.0 + t.return_frac
        curve.append((t.exit_time, equity))
        peak = max(peak, equity)
        max_dd = max(max_dd, (peak - equity) / peak)
    wins = sum(1 for t in trades if t.return_frac > 0)
    return BacktestReport(
        pair=series.pair,
        trades=tuple(trades),
        cumulative_return_frac=equity - 1.0,
        win_rate=wins / len(trades) if trades else 0.0,
        max_drawdown_frac=max_dd,
        equity_curve=tuple(curve),
        config=config,
        diagnostics=diagnostics,
    )
