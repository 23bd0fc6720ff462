"""Quarterly-rebalanced long-only simulation with turnover-proportional costs.

Timing: the table scored for quarter ``q`` is traded at the close of the
first trading day strictly after the quarter-end snapshot date. Between
rebalances weights drift with close-to-close returns. A held name that stops
printing bars is sold at its last close and the proceeds sit in cash (zero
return) until the next rebalance.
"""

from __future__ import annotations

import bisect
import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import CalendarGap, Degenerate, MissingPrices
from .ingest import DailyBar, QuarterLabel, trading_calendar
from .portfolio import PortfolioTable

log = logging.getLogger(__name__)

CASH = "$CASH"
DEFAULT_COST_RATE = 0.0001
LEDGER_COLUMNS = ("date", "return", "equity", "event_flag", "turnover", "cost")


@dataclass(frozen=True)
class RebalanceEvent:
    trade_date: dt.date
    quarter: QuarterLabel
    target: dict
    gross_turnover: float
    cost: float


@dataclass
class BacktestResult:
    dates: list
    daily_returns: list
    equity_curve: list
    events: list
    warnings: list = field(default_factory=list)

    def event_on(self, date: dt.date) -> Optional[RebalanceEvent]:
        for e in self.events:
            if e.trade_date == date:
                return e
        return None

    def ledger_rows(self) -> list[tuple]:
        by_date = {e.trade_date: e for e in self.events}
        rows = []
        for d, r, eq in zip(self.dates, self.daily_returns, self.equity_curve):
            e = by_date.get(d)
            rows.append((d.isoformat(), repr(r), repr(eq), int(e is not None),
                         repr(e.gross_turnover) if e else "0.0", repr(e.cost) if e else "0.0"))
        return rows

    def write_ledger(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LEDGER_COLUMNS)
            w.writerows(self.ledger_rows())


def drift(weights: Mapping[str, float], returns: Mapping[str, float]) -> dict[str, float]:
    keys = sorted(weights)
    grown = {k: weights[k] * (1.0 + returns.get(k, 0.0)) for k in keys}
    total = sum(grown[k] for k in keys)
    if total <= 0:
        raise Degenerate("portfolio value wiped out")
    return {k: grown[k] / total for k in keys}


def gross_turnover(target: Mapping[str, float], current: Mapping[str, float]) -> float:
    """One-sided sum of absolute weight changes over risky names (cash excluded)."""
    names = sorted((set(target) | set(current)) - {CASH})
    return sum(abs(target.get(n, 0.0) - current.get(n, 0.0)) for n in names)


def snapshot_date(calendar: Sequence[dt.date], q: QuarterLabel) -> dt.date:
    i = bisect.bisect_right(calendar, q.end_date())
    if i == 0:
        raise CalendarGap(f"no trading day on or before {q.end_date()} ({q})")
    return calendar[i - 1]


def trade_date(calendar: Sequence[dt.date], q: QuarterLabel) -> dt.date:
    snap = snapshot_date(calendar, q)
    i = bisect.bisect_right(calendar, snap)
    if i >= len(calendar):
        raise CalendarGap(f"no trading day after the {q} snapshot ({snap})")
    return calendar[i]


def target_weights(table: PortfolioTable) -> dict[str, float]:
    return {r.ticker: r.weight / 100.0 for r in table.rows if r.weight > 0}


def run_backtest(
    tables: Mapping[QuarterLabel, PortfolioTable],
    bars: Mapping[str, Sequence[DailyBar]],
    cost_rate: float = DEFAULT_COST_RATE,
    end_date: Optional[dt.date] = None,
) -> BacktestResult:
    if not tables:
        raise ValueError("no portfolio tables")
    quarters = sorted(tables)
    for a, b in zip(quarters, quarters[1:]):
        if b != a.shift(1):
            raise CalendarGap(f"no table for {a.shift(1)}")
    calendar = trading_calendar(bars)
    closes = {t: {b.date: b.close for b in series} for t, series in bars.items()}

    trades = {trade_date(calendar, q): q for q in quarters}
    start = min(trades)
    if end_date is None:
        try:
            end_date = trade_date(calendar, quarters[-1].shift(1))
        except CalendarGap:
            end_date = calendar[-1]
    days = [d for d in calendar if start <= d <= end_date]

    weights: dict[str, float] = {}
    equity = 1.0
    dates, rets, curve, events, warnings = [], [], [], [], []
    for i, d in enumerate(days):
        r = 0.0
        if weights:
            prev = days[i - 1]
            moves = {}
            for t in sorted(weights):
                if t == CASH:
                    continue
                c_now = closes.get(t, {}).get(d)
                if c_now is None:
                    msg = f"{d}: {t} has no bar; liquidated at {prev} close into cash"
                    log.warning(msg)
                    warnings.append(msg)
                    weights[CASH] = weights.get(CASH, 0.0) + weights.pop(t)
                    continue
                moves[t] = c_now / closes[t][prev] - 1.0
            r = sum(weights[t] * moves.get(t, 0.0) for t in sorted(weights))
            weights = drift(weights, moves)
        if d in trades:
            q = trades[d]
            target = target_weights(tables[q])
            missing = [t for t in sorted(target) if d not in closes.get(t, {})]
            if missing:
                raise MissingPrices(f"{q} trade on {d}: no bar for {', '.join(missing)}")
            turnover = gross_turnover(target, weights)
            cost = cost_rate * turnover
            r -= cost
            events.append(RebalanceEvent(d, q, dict(target), turnover, cost))
            weights = dict(target)
        equity *= 1.0 + r
        dates.append(d)
        rets.append(r)
        curve.append(equity)
    return BacktestResult(dates, rets, curve, events, warnings)


def benchmark_returns(closes: Mapping[dt.date, float], dates: Sequence[dt.date], name: str = "benchmark") -> list[float]:
    """Close-to-close returns aligned to ``dates``; bought at the first date's close."""
    out = []
    for i, d in enumerate(dates):
        if d not in closes:
            raise MissingPrices(f"{name}: no close on {d}")
        out.append(0.0 if i == 0 else closes[d] / closes[dates[i - 1]] - 1.0)
    return out
