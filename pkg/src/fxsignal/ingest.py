"""Parsers for the two input corpora: news/post CSV and OHLC price history CSV.

The price parser reads the Investing.com "historical data" export layout::

    Date,Price,Open,High,Low,Vol.,Change %
    04/21/2023,1.3539,1.3475,1.3564,1.3471,55.83K,+0.48%

and tolerates the usual quirks of hand-copied exports: ``K``/``M`` volume
suffixes, thousands separators, stray trailing commas inside numeric cells,
blank volume cells and unsigned percentages. Tab-separated input is accepted
as well, since tables pasted from documents usually arrive that way.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import BinaryIO, Iterable, Iterator, Optional, Union

from .labels import Label

log = logging.getLogger(__name__)

ByteSource = Union[bytes, bytearray, BinaryIO]

NEWS_HEADER = ("timestamp", "source", "pair", "weight", "label", "text")
OHLC_HEADER = ("Date", "Price", "Open", "High", "Low", "Vol.", "Change %")


class IngestError(ValueError):
    """Malformed input. ``row`` is the 1-based data row (header excluded)."""

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.field = field


class ValidationError(IngestError):
    pass


class Timeframe(str, Enum):
    H4 = "H4"
    D1 = "D1"
    MN = "MN"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class NewsRecord:
    timestamp: datetime
    source: str
    pair: str
    relevance_weight: float
    text: str
    label: Optional[Label] = None

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        if not (self.relevance_weight > 0 and math.isfinite(self.relevance_weight)):
            raise ValueError(f"relevance weight must be positive, got {self.relevance_weight}")
        if not self.text.strip():
            raise ValueError("text must be nonempty")


@dataclass(frozen=True)
class Candle:
    date: datetime
    open: float
    high: float
    low: float
    close: float
    volume: Optional[int] = None
    change_frac: Optional[float] = None

    def __post_init__(self):
        for name in ("open", "high", "low", "close"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive price at {_fmt_date(self.date)}, got {value}")
        if self.high < self.low:
            raise ValidationError(f"high {self.high} below low {self.low} at {_fmt_date(self.date)}")
        if self.change_frac is not None:
            object.__setattr__(self, "change_frac", float(self.change_frac))
        if self.volume is not None:
            object.__setattr__(self, "volume", int(self.volume))
        if self.volume is not None and self.volume < 0:
            raise ValidationError(f"negative volume at {_fmt_date(self.date)}")

    def range_violations(self) -> list[str]:
        """Open/close values lying outside the bar's [low, high] range."""
        issues = []
        if self.low > min(self.open, self.close):
            issues.append(f"low {self.low} above min(open, close) {min(self.open, self.close)}")
        if self.high < max(self.open, self.close):
            issues.append(f"high {self.high} below max(open, close) {max(self.open, self.close)}")
        return issues


@dataclass(frozen=True)
class PriceSeries:
    pair: str
    timeframe: Timeframe
    bars: tuple[Candle, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        object.__setattr__(self, "timeframe", Timeframe(self.timeframe))
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date == prev.date:
                raise ValidationError(f"duplicate timestamp {_fmt_date(cur.date)}")
            if cur.date < prev.date:
                raise ValidationError(f"bars out of order at {_fmt_date(cur.date)}")

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def dates(self) -> list[datetime]:
        return [b.date for b in self.bars]

    @property
    def closes(self) -> list[float]:
        return [b.close for b in self.bars]


# ---------------------------------------------------------------------------
# stream helpers


def _text_stream(stream: ByteSource) -> io.TextIOBase:
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(bytes(stream))
    # utf-8-sig drops a leading BOM, common in spreadsheet exports
    return io.TextIOWrapper(stream, encoding="utf-8-sig", newline="")


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 instant; a trailing ``Z`` and naive values both mean UTC."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# news


def iter_news_csv(stream: ByteSource) -> Iterator[NewsRecord]:
    text = _text_stream(stream)
    reader = csv.reader(text)
    header = next(reader, None)
    if header is None:
        raise IngestError("empty news file (missing header)")
    names = tuple(h.strip().lower() for h in header)
    if names != NEWS_HEADER:
        raise IngestError(f"bad news header {','.join(header)!r}; expected {','.join(NEWS_HEADER)!r}")

    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(NEWS_HEADER):
            raise IngestError(f"expected {len(NEWS_HEADER)} fields at row {row_no}, got {len(row)}", row_no)
        ts_s, source, pair, weight_s, label_s, body = row
        try:
            ts = parse_timestamp(ts_s)
        except ValueError:
            raise IngestError(f"bad timestamp {ts_s!r} at row {row_no}", row_no, "timestamp") from None

        if weight_s.strip():
            try:
                weight = float(weight_s)
            except ValueError:
                raise IngestError(f"bad weight {weight_s!r} at row {row_no}", row_no, "weight") from None
            if not math.isfinite(weight):
                raise IngestError(f"bad weight {weight_s!r} at row {row_no}", row_no, "weight")
            if weight <= 0:
                raise IngestError(f"nonpositive weight at row {row_no}", row_no, "weight")
        else:
            weight = 1.0

        label = None
        if label_s.strip():
            try:
                label = Label(label_s.strip().lower())
            except ValueError:
                raise IngestError(f"bad label {label_s!r} at row {row_no}", row_no, "label") from None
        if not body.strip():
            raise IngestError(f"empty text at row {row_no}", row_no, "text")
        pair = pair.strip().upper()
        if not pair:
            raise IngestError(f"empty pair at row {row_no}", row_no, "pair")

        yield NewsRecord(ts, source.strip(), pair, weight, body, label)


def parse_news_csv(stream: ByteSource) -> list[NewsRecord]:
    return list(iter_news_csv(stream))


def write_news_csv(records: Iterable[NewsRecord], out: io.TextIOBase) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(NEWS_HEADER)
    for r in records:
        w.writerow([format_timestamp(r.timestamp), r.source, r.pair, repr(r.relevance_weight),
                    r.label.value if r.label else "", r.text])


# ---------------------------------------------------------------------------
# OHLC

_DATE_FORMATS = ("%m/%d/%Y", "%m/%d/%Y %H:%M", "%m/%d/%Y %H:%M:%S")
_VOLUME_SCALE = {"K": 1_000, "M": 1_000_000}


def _header_key(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalpha())


_HEADER_KEYS = ("date", "price", "open", "high", "low", "vol", "change")
_HEADER_ALIASES = {"close": "price", "volume": "vol"}


def _parse_date(text: str) -> datetime:
    s = text.strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(s, fmt).replace(tzinfo=timezone.utc)
        except ValueError:
            pass
    return parse_timestamp(s)


def _clean_number(cell: str) -> str:
    return cell.strip().rstrip(",").replace(",", "").strip()


def _decimal(cell: str, row_no: int, name: str) -> Decimal:
    s = _clean_number(cell)
    try:
        d = Decimal(s)
    except InvalidOperation:
        raise IngestError(f"unparseable {name} cell {cell!r} at row {row_no}", row_no, name) from None
    if not d.is_finite():
        raise IngestError(f"unparseable {name} cell {cell!r} at row {row_no}", row_no, name)
    return d


def _parse_volume(cell: str, row_no: int) -> Optional[int]:
    s = _clean_number(cell).upper()
    if s in ("", "-"):
        return None
    scale = 1
    if s[-1] in _VOLUME_SCALE:
        scale = _VOLUME_SCALE[s[-1]]
        s = s[:-1]
    value = _decimal(s, row_no, "Vol.") * scale
    return int(value.to_integral_value())


def _parse_change(cell: str, row_no: int) -> Optional[float]:
    s = _clean_number(cell)
    if s in ("", "-"):
        return None
    if s.endswith("%"):
        s = s[:-1]
    return float(_decimal(s, row_no, "Change %") / 100)


def _split_ohlc_row(row: list[str], row_no: int) -> tuple[str, list[str], str, str]:
    """Recover (date, [price, open, high, low], vol, change) from a raw row.

    Unquoted stray trailing commas split a price cell into the value plus an
    empty cell. Price cells are never legitimately blank, so blanks among them
    are dropped; only the volume cell may be blank.
    """
    cells = [c.strip() for c in row]
    date = cells[0]
    prices: list[str] = []
    i = 1
    while len(prices) < 4 and i < len(cells):
        if cells[i] and cells[i] != ",":
            prices.append(cells[i])
        i += 1
    if len(prices) < 4:
        missing = ("Price", "Open", "High", "Low")[len(prices)]
        raise IngestError(f"missing {missing} cell at row {row_no}", row_no, missing)
    rest = cells[i:]
    while len(rest) > 2 and rest[-1] == "":
        rest.pop()
    while len(rest) > 2 and "" in rest:
        rest.remove("")
    if len(rest) > 2:
        raise IngestError(f"too many cells at row {row_no}: {row!r}", row_no)
    rest += [""] * (2 - len(rest))
    return date, prices, rest[0], rest[1]


def iter_ohlc_rows(stream: ByteSource) -> Iterator[Candle]:
    """Yield candles in file order (no sorting, no series-level checks)."""
    text = _text_stream(stream)
    first = text.readline()
    if not first.strip():
        raise IngestError("empty price file (missing header)")
    delimiter = "\t" if "\t" in first else ","
    header = next(csv.reader([first], delimiter=delimiter))
    keys = [_HEADER_ALIASES.get(k, k) for k in (_header_key(h) for h in header) if k]
    if tuple(keys[:5]) != _HEADER_KEYS[:5] or keys[5:] not in (["vol", "change"], ["vol"], []):
        raise IngestError(f"bad price header {first.strip()!r}; expected {','.join(OHLC_HEADER)!r}")

    for row_no, row in enumerate(csv.reader(text, delimiter=delimiter, skipinitialspace=True), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        date_s, prices, vol_s, change_s = _split_ohlc_row(row, row_no)
        try:
            date = _parse_date(date_s)
        except ValueError:
            raise IngestError(f"unparseable Date cell {date_s!r} at row {row_no}", row_no, "Date") from None
        close, open_, high, low = (float(_decimal(c, row_no, n))
                                   for c, n in zip(prices, ("Price", "Open", "High", "Low")))
        try:
            yield Candle(date, open_, high, low, close,
                         volume=_parse_volume(vol_s, row_no),
                         change_frac=_parse_change(change_s, row_no))
        except ValidationError as exc:
            exc.row = row_no
            raise


def parse_ohlc_csv(stream: ByteSource, pair: str, timeframe: Union[Timeframe, str] = Timeframe.H4,
                   strict: bool = False) -> PriceSeries:
    """Parse an OHLC export into a validated, ascending :class:`PriceSeries`.

    Bars whose open or close falls outside [low, high] raise in ``strict``
    mode; otherwise they are kept and logged. Inverted high/low ranges,
    nonpositive prices and duplicate dates always raise.
    """
    candles = []
    for c in iter_ohlc_rows(stream):
        issues = c.range_violations()
        if issues:
            msg = f"{pair} {_fmt_date(c.date)}: " + "; ".join(issues)
            if strict:
                raise ValidationError(msg)
            log.warning("inconsistent bar kept: %s", msg)
        candles.append(c)
    candles.sort(key=lambda c: c.date)
    return PriceSeries(pair.upper(), Timeframe(timeframe), tuple(candles))


def _fmt_date(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    if (ts.hour, ts.minute, ts.second) == (0, 0, 0):
        return ts.strftime("%m/%d/%Y")
    if ts.second == 0:
        return ts.strftime("%m/%d/%Y %H:%M")
    return ts.strftime("%m/%d/%Y %H:%M:%S")


def _fmt_change(frac: Optional[float]) -> str:
    if frac is None:
        return ""
    pct = Decimal(repr(frac)) * 100
    return ("-" if pct < 0 else "+") + format(abs(pct), "f") + "%"


def write_ohlc_csv(series: PriceSeries, out: io.TextIOBase) -> None:
    """Canonical CSV: same column layout as the export, lossless float text."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(OHLC_HEADER)
    for b in series.bars:
        w.writerow([_fmt_date(b.date), repr(b.close), repr(b.open), repr(b.high), repr(b.low),
                    "" if b.volume is None else str(b.volume), _fmt_change(b.change_frac)])


def format_ohlc_csv(series: PriceSeries) -> str:
    buf = io.StringIO()
    write_ohlc_csv(series, buf)
    return buf.getvalue()

