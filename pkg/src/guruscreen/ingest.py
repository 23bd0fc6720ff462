"""Fundamentals and price loading, quarter calendar, snapshots and TTM sums.

NA is represented by ``None`` throughout. Nothing is ever imputed.
"""

from __future__ import annotations

import bisect
import calendar
import csv
import datetime as dt
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import MalformedQuarter, NoTradingData, RowError, SchemaError

Num = Optional[float]

_QUARTER_RE = re.compile(r"^(\d{4})Q([1-4])$")


@dataclass(frozen=True, order=True)
class QuarterLabel:
    year: int
    quarter: int

    def __post_init__(self):
        if not 1 <= self.quarter <= 4:
            raise MalformedQuarter(f"quarter must be 1..4, got {self.quarter}")

    def __str__(self) -> str:
        return f"{self.year:04d}Q{self.quarter}"

    def shift(self, n: int) -> "QuarterLabel":
        idx = self.year * 4 + (self.quarter - 1) + n
        return QuarterLabel(idx // 4, idx % 4 + 1)

    def end_date(self) -> dt.date:
        month = self.quarter * 3
        return dt.date(self.year, month, calendar.monthrange(self.year, month)[1])


def parse_quarter(text: str) -> QuarterLabel:
    m = _QUARTER_RE.match(text) if isinstance(text, str) else None
    if m is None:
        raise MalformedQuarter(f"not a quarter label: {text!r}")
    return QuarterLabel(int(m.group(1)), int(m.group(2)))


def format_quarter(q: QuarterLabel) -> str:
    return str(q)


def quarter_range(start: QuarterLabel, end: QuarterLabel) -> list[QuarterLabel]:
    out = []
    q = start
    while q <= end:
        out.append(q)
        q = q.shift(1)
    return out


STOCK_FIELDS = (
    "total_assets",
    "current_assets",
    "current_liabilities",
    "total_liabilities",
    "long_term_debt",
    "shareholders_equity",
    "retained_earnings",
    "goodwill",
    "other_intangibles",
    "net_ppe",
    "cash_and_equivalents",
)
# single-quarter flows; aggregate with ttm(), never store TTM values
FLOW_FIELDS = (
    "revenue",
    "gross_profit",
    "ebit",
    "net_income",
    "interest_expense",
    "cfo",
    "capex",
)
FUNDAMENTALS_COLUMNS = ("ticker", "quarter") + STOCK_FIELDS + FLOW_FIELDS
BENCHMARK_COLUMNS = ("name", "date", "close")
PRICES_COLUMNS = ("ticker", "date", "open", "high", "low", "close", "volume", "num_shares")


@dataclass(frozen=True)
class FundamentalsQuarter:
    ticker: str
    quarter: QuarterLabel
    total_assets: Num = None
    current_assets: Num = None
    current_liabilities: Num = None
    total_liabilities: Num = None
    long_term_debt: Num = None
    shareholders_equity: Num = None
    retained_earnings: Num = None
    goodwill: Num = None
    other_intangibles: Num = None
    net_ppe: Num = None
    cash_and_equivalents: Num = None
    revenue: Num = None
    gross_profit: Num = None
    ebit: Num = None
    net_income: Num = None
    interest_expense: Num = None
    cfo: Num = None
    capex: Num = None


@dataclass(frozen=True)
class DailyBar:
    ticker: str
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: int
    num_shares: Num = None


@dataclass(frozen=True)
class QuarterSnapshot:
    ticker: str
    quarter: QuarterLabel
    snapshot_date: dt.date
    price: float
    shares: Num
    mktcap: Num


class Fundamentals(Mapping):
    """Immutable ``(ticker, quarter) -> FundamentalsQuarter`` collection."""

    def __init__(self, rows: Iterable[FundamentalsQuarter]):
        data: dict[tuple[str, QuarterLabel], FundamentalsQuarter] = {}
        for r in rows:
            key = (r.ticker, r.quarter)
            if key in data:
                raise SchemaError(f"duplicate fundamentals row for {r.ticker} {r.quarter}")
            data[key] = r
        self._data = dict(sorted(data.items(), key=lambda kv: (kv[0][0], kv[0][1])))

    def __getitem__(self, key):
        return self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def get_row(self, ticker: str, q: QuarterLabel) -> Optional[FundamentalsQuarter]:
        return self._data.get((ticker, q))

    def tickers(self, q: Optional[QuarterLabel] = None) -> list[str]:
        return sorted({t for (t, qq) in self._data if q is None or qq == q})

    def quarters(self) -> list[QuarterLabel]:
        return sorted({q for (_, q) in self._data})

    def field(self, ticker: str, name: str, q: QuarterLabel) -> Num:
        row = self._data.get((ticker, q))
        return None if row is None else getattr(row, name)

    def flows(self, ticker: str, name: str) -> dict[QuarterLabel, Num]:
        return {q: getattr(r, name) for (t, q), r in self._data.items() if t == ticker}

    def ttm(self, ticker: str, name: str, upto: QuarterLabel) -> Num:
        window = {upto.shift(-k): self.field(ticker, name, upto.shift(-k)) for k in range(4)}
        return ttm(window, upto)


def _sum4(vals: Sequence[float]) -> float:
    # oldest first, so the summation order is fixed
    total = 0.0
    for v in reversed(vals):
        total += v
    return total


def ttm(flows: Mapping[QuarterLabel, Num], upto: QuarterLabel) -> Num:
    """Sum of the four quarterly values ending at ``upto``; NA if any is missing."""
    vals = [flows.get(upto.shift(-k)) for k in range(4)]
    if any(v is None for v in vals):
        return None
    return _sum4(vals)


def quarter_end_snapshot(bars: Sequence[DailyBar], quarter: QuarterLabel) -> QuarterSnapshot:
    """Last bar on or before the calendar quarter-end."""
    end = quarter.end_date()
    dates = [b.date for b in bars]
    i = bisect.bisect_right(dates, end)
    if i == 0:
        ticker = bars[0].ticker if bars else "?"
        raise NoTradingData(f"{ticker}: no bar on or before {end} ({quarter})")
    bar = bars[i - 1]
    mktcap = None if bar.num_shares is None else bar.close * bar.num_shares
    return QuarterSnapshot(bar.ticker, quarter, bar.date, bar.close, bar.num_shares, mktcap)


# --- CSV io -----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_num(text: str) -> Num:
    text = text.strip()
    if text == "":
        return None
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def _open_rows(path, columns):
    path = Path(path)
    fh = open(path, newline="", encoding="utf-8")
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        fh.close()
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in header]
    missing = [c for c in columns if c not in header]
    if missing:
        fh.close()
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    return path, fh, reader, {c: header.index(c) for c in columns}


def load_fundamentals(path) -> Fundamentals:
    path, fh, reader, idx = _open_rows(path, FUNDAMENTALS_COLUMNS)
    rows, problems = [], []
    with fh:
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                ticker = rec[idx["ticker"]].strip()
                if not ticker:
                    raise ValueError("empty ticker")
                values = {c: _parse_num(rec[idx[c]]) for c in STOCK_FIELDS + FLOW_FIELDS}
                rows.append(FundamentalsQuarter(ticker, parse_quarter(rec[idx["quarter"]].strip()), **values))
            except (ValueError, IndexError) as exc:
                problems.append((lineno, str(exc) or type(exc).__name__))
    if problems:
        raise RowError(path, problems)
    return Fundamentals(rows)


def load_bars(path) -> dict[str, tuple[DailyBar, ...]]:
    """Daily bars grouped by ticker, dates strictly increasing per ticker."""
    path, fh, reader, idx = _open_rows(path, PRICES_COLUMNS)
    out: dict[str, list[DailyBar]] = {}
    problems = []
    with fh:
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                ticker = rec[idx["ticker"]].strip()
                if not ticker:
                    raise ValueError("empty ticker")
                date = dt.date.fromisoformat(rec[idx["date"]].strip())
                o, h, lo, c = (_parse_num(rec[idx[k]]) for k in ("open", "high", "low", "close"))
                if c is None or c <= 0:
                    raise ValueError("close must be > 0")
                vol = _parse_num(rec[idx["volume"]])
                shares = _parse_num(rec[idx["num_shares"]])
                bar = DailyBar(ticker, date, o, h, lo, c, 0 if vol is None else int(vol), shares)
                series = out.setdefault(ticker, [])
                if series and series[-1].date >= date:
                    raise ValueError(f"{ticker}: dates not strictly increasing at {date}")
                series.append(bar)
            except (ValueError, IndexError) as exc:
                problems.append((lineno, str(exc) or type(exc).__name__))
    if problems:
        raise RowError(path, problems)
    return {t: tuple(out[t]) for t in sorted(out)}


def load_benchmarks(path) -> dict[str, dict[dt.date, float]]:
    """Long-format ``name,date,close`` benchmark series."""
    path, fh, reader, idx = _open_rows(path, BENCHMARK_COLUMNS)
    out: dict[str, dict[dt.date, float]] = {}
    problems = []
    with fh:
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                name = rec[idx["name"]].strip()
                date = dt.date.fromisoformat(rec[idx["date"]].strip())
                close = _parse_num(rec[idx["close"]])
                if not name or close is None or close <= 0:
                    raise ValueError("benchmark rows need a name and a positive close")
                series = out.setdefault(name, {})
                if date in series:
                    raise ValueError(f"{name}: duplicate date {date}")
                series[date] = close
            except (ValueError, IndexError) as exc:
                problems.append((lineno, str(exc) or type(exc).__name__))
    if problems:
        raise RowError(path, problems)
    return {k: out[k] for k in sorted(out)}


def write_fundamentals(rows: Iterable[FundamentalsQuarter], path) -> None:
    names = [f.name for f in fields(FundamentalsQuarter)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FUNDAMENTALS_COLUMNS)
        for r in sorted(rows, key=lambda r: (r.ticker, r.quarter)):
            w.writerow(_fmt(getattr(r, n)) for n in names)


def write_bars(bars: Mapping[str, Sequence[DailyBar]] | Iterable[DailyBar], path) -> None:
    if isinstance(bars, Mapping):
        flat = [b for t in sorted(bars) for b in bars[t]]
    else:
        flat = sorted(bars, key=lambda b: (b.ticker, b.date))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PRICES_COLUMNS)
        for b in flat:
            w.writerow([b.ticker, b.date.isoformat(), _fmt(b.open), _fmt(b.high), _fmt(b.low),
                        _fmt(b.close), str(b.volume), _fmt(b.num_shares)])


def trading_calendar(bars: Mapping[str, Sequence[DailyBar]]) -> list[dt.date]:
    return sorted({b.date for series in bars.values() for b in series})


def snapshots(bars: Mapping[str, Sequence[DailyBar]], quarter: QuarterLabel) -> dict[str, Optional[QuarterSnapshot]]:
    """Quarter-end snapshot per ticker, ``None`` where no bar precedes quarter-end."""
    out = {}
    for t, series in bars.items():
        try:
            out[t] = quarter_end_snapshot(series, quarter)
        except NoTradingData:
            out[t] = None
    return out
