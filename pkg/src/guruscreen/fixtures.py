"""Deterministic synthetic universe for tests and demos.

Randomness comes from a 32-bit linear congruential generator

    state <- (1664525 * state + 1013904223) mod 2**32
    uniform = state / 2**32

with normals drawn as the sum of 12 uniforms minus 6, so the draws involve
only IEEE additions and multiplications and can be reproduced bit-for-bit in
any language. Balance sheets are built so TA = CA + net PPE + goodwill +
other intangibles, cash <= CA and equity = TA - TL > 0.
"""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

from .ingest import DailyBar, FundamentalsQuarter, QuarterLabel, quarter_range, write_bars, write_fundamentals

LCG_A = 1664525
LCG_C = 1013904223
LCG_M = 2**32

# fields that are occasionally blanked to exercise NA handling
_NA_CANDIDATES = ("long_term_debt", "net_ppe", "goodwill", "gross_profit", "cash_and_equivalents")
NA_RATE = 0.03


class LCG:
    def __init__(self, seed: int):
        self.state = seed % LCG_M

    def uniform(self) -> float:
        self.state = (LCG_A * self.state + LCG_C) % LCG_M
        return self.state / LCG_M

    def between(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def normal(self) -> float:
        total = 0.0
        for _ in range(12):
            total += self.uniform()
        return total - 6.0


def _business_days(start: dt.date, end: dt.date) -> list[dt.date]:
    out, d = [], start
    while d <= end:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def _quarter_of(d: dt.date) -> QuarterLabel:
    return QuarterLabel(d.year, (d.month - 1) // 3 + 1)


def _r2(x: float) -> float:
    return round(x, 2)


def generate_universe(
    n_tickers: int = 10,
    start: QuarterLabel = QuarterLabel(2022, 1),
    end: QuarterLabel = QuarterLabel(2025, 2),
    seed: int = 42,
    price_tail_days: int = 120,
):
    """Return ``(fundamentals rows, {ticker: bars})``.

    Bars run from the first day of ``start`` to ``price_tail_days`` calendar
    days past the end of ``end`` so a backtest can hold the last portfolio.
    """
    if n_tickers < 1:
        raise ValueError("n_tickers must be >= 1")
    rng = LCG(seed)
    quarters = quarter_range(start, end)
    first_day = dt.date(start.year, 3 * start.quarter - 2, 1)
    days = _business_days(first_day, end.end_date() + dt.timedelta(days=price_tail_days))

    rows: list[FundamentalsQuarter] = []
    bars: dict[str, tuple[DailyBar, ...]] = {}
    for i in range(n_tickers):
        ticker = f"SYN{i:03d}"
        rev = rng.between(5e8, 5e9)
        growth = rng.between(-0.02, 0.05)
        gross_m = rng.between(0.30, 0.70)
        ebit_m = rng.between(-0.05, 0.35) if i % 7 == 3 else rng.between(0.05, 0.35)
        turnover = rng.between(0.4, 1.2)
        ca_frac = rng.between(0.25, 0.55)
        ppe_frac = rng.between(0.10, 0.35)
        gw_frac = rng.between(0.0, 0.9 - ca_frac - ppe_frac) * 0.5
        cash_frac = rng.between(0.15, 0.5)
        cur_ratio = rng.between(0.8, 3.0)
        ltd_frac = rng.between(0.35, 0.45) if i % 5 == 4 else rng.between(0.02, 0.30)
        other_liab = rng.between(0.02, 0.10)
        capex_ratio = rng.between(0.02, 0.12)
        re_frac = rng.between(0.2, 1.2)
        rate = rng.between(0.02, 0.07)
        shares = float(round(rng.between(1e8, 2e9)))
        pe0 = rng.between(12.0, 40.0)
        mu = rng.between(0.0001, 0.0012)
        sigma = rng.between(0.008, 0.025)
        neg_interest = i % 2 == 1

        shares_by_q = {}
        annual_ni = None
        for q in quarters:
            rev *= 1.0 + growth + 0.03 * rng.normal()
            rev = max(rev, 5e7)
            ta = rev * 4.0 / turnover
            ca = ta * ca_frac
            ppe = ta * ppe_frac
            gw = ta * gw_frac
            oi = ta - ca - ppe - gw
            cash = ca * cash_frac
            cl = ca / (cur_ratio * (1.0 + 0.05 * rng.normal()))
            ltd = ta * ltd_frac
            tl = min(cl + ltd + ta * other_liab, 0.9 * ta)
            equity = ta - tl
            ebit = rev * (ebit_m + 0.02 * rng.normal())
            interest = ltd * rate / 4.0
            ni = (ebit - interest) * 0.79
            cfo = ni * (1.1 + 0.15 * rng.normal()) + rev * 0.03
            capex = rev * capex_ratio
            shares *= 1.0 + 0.01 * (rng.uniform() - 0.6)
            shares = float(round(shares))
            shares_by_q[q] = shares
            values = {
                "total_assets": _r2(ta),
                "current_assets": _r2(ca),
                "current_liabilities": _r2(cl),
                "total_liabilities": _r2(tl),
                "long_term_debt": _r2(ltd),
                "shareholders_equity": _r2(equity),
                "retained_earnings": _r2(equity * re_frac),
                "goodwill": _r2(gw),
                "other_intangibles": _r2(oi),
                "net_ppe": _r2(ppe),
                "cash_and_equivalents": _r2(cash),
                "revenue": _r2(rev),
                "gross_profit": _r2(rev * gross_m),
                "ebit": _r2(ebit),
                "net_income": _r2(ni),
                "interest_expense": _r2(-interest if neg_interest else interest),
                "cfo": _r2(cfo),
                "capex": _r2(capex),
            }
            if rng.uniform() < NA_RATE * len(_NA_CANDIDATES):
                values[_NA_CANDIDATES[int(rng.uniform() * len(_NA_CANDIDATES))]] = None
            rows.append(FundamentalsQuarter(ticker, q, **values))
            if annual_ni is None:
                annual_ni = max(ni, rev * 0.02) * 4.0

        price = max(round(annual_ni * pe0 / shares_by_q[quarters[0]], 4), 1.0)
        series = []
        last_q = quarters[-1]
        for d in days:
            o = price
            price = max(round(price * (1.0 + mu + sigma * rng.normal()), 4), 0.01)
            spread = abs(rng.normal()) * 0.004
            q = _quarter_of(d)
            sh = shares_by_q[q if q <= last_q else last_q]
            series.append(DailyBar(
                ticker, d, round(o, 4), round(max(o, price) * (1.0 + spread), 4),
                round(min(o, price) * (1.0 - spread), 4), price,
                int(1_000_000 * (1.0 + rng.uniform())), sh,
            ))
        bars[ticker] = tuple(series)
    return rows, bars


def write_universe(outdir, n_tickers: int = 10, start: QuarterLabel = QuarterLabel(2022, 1),
                   end: QuarterLabel = QuarterLabel(2025, 2), seed: int = 42) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows, bars = generate_universe(n_tickers, start, end, seed)
    f_path, p_path = outdir / "fundamentals.csv", outdir / "prices.csv"
    write_fundamentals(rows, f_path)
    write_bars(bars, p_path)
    return f_path, p_path


def generate_benchmarks(bars, seed: int = 7) -> dict[str, dict[dt.date, float]]:
    """Two index-like close series on the same calendar as ``bars``."""
    rng = LCG(seed)
    dates = sorted({b.date for s in bars.values() for b in s})
    out = {}
    for name, mu, sigma in (("NDX", 0.0008, 0.013), ("SPX", 0.0006, 0.010)):
        level, closes = 100.0, {}
        for d in dates:
            level = round(level * (1.0 + mu + sigma * rng.normal()), 4)
            closes[d] = level
        out[name] = closes
    return out


def write_benchmarks(benchmarks, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("name", "date", "close"))
        for name in sorted(benchmarks):
            for d in sorted(benchmarks[name]):
                w.writerow((name, d.isoformat(), repr(benchmarks[name][d])))
