"""Per-ticker financial metrics with strict NA semantics.

Every ratio returns ``None`` when an operand is missing, the denominator is
zero, or the denominator is non-positive where a positive one is required.
Flow items use TTM sums unless noted. CapEx is a positive outflow.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .ingest import DailyBar, Fundamentals, Num, QuarterLabel, QuarterSnapshot, snapshots

ALTMAN_MODELS = {
    # name: (ratio names, coefficients, (distress_below, safe_above))
    "Z": (("wc_ta", "re_ta", "ebit_ta", "mve_tl", "sales_ta"), (1.2, 1.4, 3.3, 0.6, 1.0), (1.81, 2.99)),
    "Zprime": (("wc_ta", "re_ta", "ebit_ta", "mve_tl", "sales_ta"), (0.717, 0.847, 3.107, 0.420, 0.998), (1.23, 2.90)),
    "Zdoubleprime": (("wc_ta", "re_ta", "ebit_ta", "bve_tl"), (6.56, 3.26, 6.72, 1.05), (1.10, 2.60)),
}
ALTMAN_ORDER = ("Z", "Zprime", "Zdoubleprime")

PIOTROSKI_SIGNALS = (
    "roa_positive",
    "cfo_positive",
    "delta_roa",
    "accrual",
    "delta_leverage",
    "delta_liquidity",
    "no_equity_issuance",
    "delta_margin",
    "delta_turnover",
)


def div(num: Num, den: Num, positive: bool = False) -> Num:
    if num is None or den is None or den == 0:
        return None
    if positive and den < 0:
        return None
    return num / den


def sub(a: Num, b: Num) -> Num:
    return None if a is None or b is None else a - b


def _gt(a: Num, b: Num) -> Optional[int]:
    return None if a is None or b is None else int(a > b)


@dataclass(frozen=True)
class AltmanRow:
    ticker: str
    model: Optional[str]
    z_score: Num
    band: Optional[str]
    wc_ta: Num = None
    re_ta: Num = None
    ebit_ta: Num = None
    mve_tl: Num = None
    sales_ta: Num = None
    bve_tl: Num = None


@dataclass(frozen=True)
class PiotroskiRow:
    ticker: str
    signals: tuple
    roa_t: Num = None
    delta_margin: Num = None

    @property
    def f_score(self) -> int:
        return sum(1 for s in self.signals if s == 1)

    @property
    def evaluable(self) -> int:
        return sum(1 for s in self.signals if s is not None)


@dataclass
class MetricFrame:
    quarter: QuarterLabel
    metrics: dict = field(default_factory=dict)
    altman: dict = field(default_factory=dict)
    piotroski: dict = field(default_factory=dict)

    @property
    def tickers(self) -> list[str]:
        return list(self.metrics)


# --- standard metrics -------------------------------------------------------

def liquidity_leverage(book: Fundamentals, ticker: str, q: QuarterLabel) -> dict:
    f = book.get_row(ticker, q)
    ebit_ttm = book.ttm(ticker, "ebit", q)
    int_ttm = book.ttm(ticker, "interest_expense", q)
    return {
        "current_ratio": div(f.current_assets, f.current_liabilities, positive=True),
        "debt_to_equity": div(f.total_liabilities, f.shareholders_equity, positive=True),
        "interest_coverage": div(ebit_ttm, None if int_ttm is None else abs(int_ttm)),
        "working_capital_ratio": div(sub(f.current_assets, f.current_liabilities), f.total_assets, positive=True),
    }


def profitability(book: Fundamentals, ticker: str, q: QuarterLabel) -> dict:
    f = book.get_row(ticker, q)
    ni_ttm = book.ttm(ticker, "net_income", q)
    rev_ttm = book.ttm(ticker, "revenue", q)
    return {
        "roe": div(ni_ttm, f.shareholders_equity, positive=True),
        "roa": div(f.net_income, f.total_assets, positive=True),
        "profit_margin": div(ni_ttm, rev_ttm, positive=True),
        "asset_turnover": div(rev_ttm, f.total_assets, positive=True),
    }


def valuation(book: Fundamentals, ticker: str, q: QuarterLabel, snap: Optional[QuarterSnapshot]) -> dict:
    f = book.get_row(ticker, q)
    price = None if snap is None else snap.price
    mktcap = None if snap is None else snap.mktcap
    pe = div(mktcap, book.ttm(ticker, "net_income", q), positive=True)
    pb = div(mktcap, f.shareholders_equity, positive=True)
    ncav = sub(f.current_assets, f.total_liabilities)
    return {
        "price": price,
        "mktcap": mktcap,
        "pe": pe,
        "pb": pb,
        "pe_x_pb": None if pe is None or pb is None else pe * pb,
        "ncav": ncav,
        "is_netnet": None if mktcap is None or ncav is None else mktcap < ncav,
    }


def greenblatt_inputs(book: Fundamentals, ticker: str, q: QuarterLabel, snap: Optional[QuarterSnapshot]) -> dict:
    f = book.get_row(ticker, q)
    ebit_ttm = book.ttm(ticker, "ebit", q)
    mktcap = None if snap is None else snap.mktcap
    debt = f.long_term_debt
    if debt is None:
        debt = sub(f.total_liabilities, f.current_liabilities)
    ev = None
    if mktcap is not None and debt is not None and f.cash_and_equivalents is not None:
        ev = mktcap + debt - f.cash_and_equivalents
        if ev <= 0:
            ev = None
    net_ppe = f.net_ppe
    if net_ppe is None:
        intangibles = None if f.goodwill is None or f.other_intangibles is None else f.goodwill + f.other_intangibles
        net_ppe = sub(sub(f.total_assets, f.current_assets), intangibles)
    nwc = sub(sub(f.current_assets, f.cash_and_equivalents), f.current_liabilities)
    capital = None if nwc is None or net_ppe is None else nwc + net_ppe
    return {
        "ebit_ttm": ebit_ttm,
        "ev": ev,
        "earnings_yield": div(ebit_ttm, ev),
        "roic": None if capital is None or capital <= 0 else div(ebit_ttm, capital),
    }


def altman_band(model: Optional[str], z: Num) -> Optional[str]:
    if model is None or z is None:
        return None
    lower, upper = ALTMAN_MODELS[model][2]
    if z < lower:
        return "Distress"
    if z > upper:
        return "Safe"
    return "Grey"


def altman_z(model: str, ratios: Mapping[str, Num]) -> Num:
    names, coefs, _ = ALTMAN_MODELS[model]
    vals = [ratios.get(n) for n in names]
    if any(v is None for v in vals):
        return None
    z = 0.0
    for c, v in zip(coefs, vals):
        z += c * v
    return z


def select_altman_model(ratios: Mapping[str, Num]) -> Optional[str]:
    for model in ALTMAN_ORDER:
        if all(ratios.get(n) is not None for n in ALTMAN_MODELS[model][0]):
            return model
    return None


def altman_from_ratios(ticker: str, ratios: Mapping[str, Num], model: Optional[str] = None) -> AltmanRow:
    if model is None:
        model = select_altman_model(ratios)
    z = None if model is None else altman_z(model, ratios)
    keys = ("wc_ta", "re_ta", "ebit_ta", "mve_tl", "sales_ta", "bve_tl")
    return AltmanRow(ticker, model, z, altman_band(model, z), **{k: ratios.get(k) for k in keys})


def altman_inputs(book: Fundamentals, ticker: str, q: QuarterLabel, snap: Optional[QuarterSnapshot]) -> AltmanRow:
    f = book.get_row(ticker, q)
    ta, tl = f.total_assets, f.total_liabilities
    mktcap = None if snap is None else snap.mktcap
    ratios = {
        "wc_ta": div(sub(f.current_assets, f.current_liabilities), ta, positive=True),
        "re_ta": div(f.retained_earnings, ta, positive=True),
        "ebit_ta": div(book.ttm(ticker, "ebit", q), ta, positive=True),
        "mve_tl": div(mktcap, tl, positive=True),
        "sales_ta": div(book.ttm(ticker, "revenue", q), ta, positive=True),
        "bve_tl": div(f.shareholders_equity, tl, positive=True),
    }
    return altman_from_ratios(ticker, ratios)


# --- Piotroski ---------------------------------------------------------------

def _leverage_pair(f_t, f_p):
    if f_p is None:
        return None, None
    if f_t.long_term_debt is not None and f_p.long_term_debt is not None:
        num_t, num_p = f_t.long_term_debt, f_p.long_term_debt
    else:
        num_t, num_p = f_t.total_liabilities, f_p.total_liabilities
    return div(num_t, f_t.total_assets, positive=True), div(num_p, f_p.total_assets, positive=True)


def piotroski_signals(
    book: Fundamentals,
    ticker: str,
    q: QuarterLabel,
    snap_t: Optional[QuarterSnapshot],
    snap_prev: Optional[QuarterSnapshot],
) -> PiotroskiRow:
    """Nine binary signals on single-quarter flows, compared with the same quarter a year earlier."""
    f_t = book.get_row(ticker, q)
    f_p = book.get_row(ticker, q.shift(-4))

    def g(row, name):
        return None if row is None else getattr(row, name)

    def roa(row):
        return div(g(row, "net_income"), g(row, "total_assets"), positive=True)

    def cr(row):
        return div(g(row, "current_assets"), g(row, "current_liabilities"), positive=True)

    def gm(row):
        return div(g(row, "gross_profit"), g(row, "revenue"), positive=True)

    def at(row):
        return div(g(row, "revenue"), g(row, "total_assets"), positive=True)

    roa_t = roa(f_t)
    lev_t, lev_p = _leverage_pair(f_t, f_p)
    sh_t = None if snap_t is None else snap_t.shares
    sh_p = None if snap_prev is None else snap_prev.shares
    d_margin = sub(gm(f_t), gm(f_p))

    signals = (
        _gt(roa_t, 0.0),
        _gt(f_t.cfo, 0.0),
        _gt(sub(roa_t, roa(f_p)), 0.0),
        _gt(f_t.cfo, f_t.net_income),
        _gt(0.0, sub(lev_t, lev_p)),
        _gt(sub(cr(f_t), cr(f_p)), 0.0),
        None if sh_t is None or sh_p is None else int(sh_t <= sh_p),
        _gt(d_margin, 0.0),
        _gt(sub(at(f_t), at(f_p)), 0.0),
    )
    return PiotroskiRow(ticker, signals, roa_t=roa_t, delta_margin=d_margin)


# --- Buffett auxiliaries -----------------------------------------------------

def margin_stability(margins: Sequence[Num]) -> Num:
    if len(margins) < 4 or any(m is None for m in margins):
        return None
    mean = statistics.fmean(margins)
    sd = statistics.stdev(margins)
    return min(1.0, max(0.0, 1.0 - sd / (abs(mean) + 1e-9)))


def buffett_extras(
    book: Fundamentals,
    ticker: str,
    q: QuarterLabel,
    snap_t: Optional[QuarterSnapshot],
    snap_prev: Optional[QuarterSnapshot],
) -> dict:
    f = book.get_row(ticker, q)
    cfo = book.ttm(ticker, "cfo", q)
    capex = book.ttm(ticker, "capex", q)
    ni = book.ttm(ticker, "net_income", q)
    rev = book.ttm(ticker, "revenue", q)
    mktcap = None if snap_t is None else snap_t.mktcap
    fcf = sub(cfo, capex)
    fcf_yield = div(fcf, mktcap, positive=True)
    margins = []
    for k in range(4):
        qk = q.shift(-k)
        margins.append(div(book.field(ticker, "net_income", qk), book.field(ticker, "revenue", qk), positive=True))
    sh_t = None if snap_t is None else snap_t.shares
    sh_p = None if snap_prev is None else snap_prev.shares
    return {
        "fcf_ttm": fcf,
        "fcf_yield": fcf_yield,
        "roce": div(book.ttm(ticker, "ebit", q), sub(f.total_assets, f.current_liabilities), positive=True),
        "cash_conversion": div(cfo, ni, positive=True),
        "margin_stability": margin_stability(margins[::-1]),
        "buyback_yield": div(sub(sh_p, sh_t), sh_p, positive=True),
        "capex_intensity": div(capex, rev, positive=True),
        "owner_earnings_yield": fcf_yield,
    }


# --- frame assembly ----------------------------------------------------------

def build_frame(book: Fundamentals, bars: Mapping[str, Sequence[DailyBar]], q: QuarterLabel) -> MetricFrame:
    """Every metric for every ticker with fundamentals in ``q``, alphabetical."""
    snaps_t = snapshots(bars, q)
    snaps_p = snapshots(bars, q.shift(-4))
    frame = MetricFrame(q)
    for t in book.tickers(q):
        st, sp = snaps_t.get(t), snaps_p.get(t)
        m = {}
        m.update(liquidity_leverage(book, t, q))
        m.update(profitability(book, t, q))
        m.update(valuation(book, t, q, st))
        m.update(greenblatt_inputs(book, t, q, st))
        m.update(buffett_extras(book, t, q, st, sp))
        alt = altman_inputs(book, t, q, st)
        m["ebit_ta"] = alt.ebit_ta
        frame.metrics[t] = m
        frame.altman[t] = alt
        frame.piotroski[t] = piotroski_signals(book, t, q, st, sp)
    return frame
