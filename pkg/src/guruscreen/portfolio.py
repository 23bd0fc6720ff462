"""Score-proportional integer weights and the four-column markdown table."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import (
    BadScoreFormat,
    BadWeightFormat,
    EmptyPortfolio,
    EmptyReason,
    HeaderMismatch,
    TableError,
    UnknownGuru,
    WeightSumError,
)
from .ingest import QuarterLabel
from .strategies import GURUS, ScoredTicker

HEADER = "| Ticker | Score | Weight (%) | Reason |"
SEPARATOR = "|--------|-------|------------|--------|"
MAX_REASON = 120

_SCORE_RE = re.compile(r"^\d\.\d{2}$")
_WEIGHT_RE = re.compile(r"^\d+$")
_SEP_CELL_RE = re.compile(r"^-{3,}$")


@dataclass(frozen=True)
class PortfolioRow:
    ticker: str
    score: float
    weight: int
    reason: str


@dataclass(frozen=True)
class PortfolioTable:
    quarter: Optional[QuarterLabel]
    guru: Optional[str]
    rows: tuple

    @property
    def tickers(self) -> list[str]:
        return [r.ticker for r in self.rows]

    def weights(self) -> dict[str, int]:
        return {r.ticker: r.weight for r in self.rows}

    def validate(self) -> None:
        if not self.rows:
            raise EmptyPortfolio("table has no rows")
        seen = set()
        prev = None
        for r in self.rows:
            if not r.ticker or "|" in r.ticker:
                raise TableError(f"bad ticker {r.ticker!r}")
            if r.ticker in seen:
                raise TableError(f"duplicate ticker {r.ticker}")
            seen.add(r.ticker)
            if not 0.0 <= r.score <= 1.0 or round(r.score, 2) != r.score:
                raise BadScoreFormat(f"{r.ticker}: score {r.score!r} is not 2 dp in [0, 1]")
            if not isinstance(r.weight, int) or r.weight < 0:
                raise BadWeightFormat(f"{r.ticker}: weight {r.weight!r}")
            if not r.reason.strip():
                raise EmptyReason(f"{r.ticker}: empty reason")
            if "|" in r.reason or "\n" in r.reason:
                raise TableError(f"{r.ticker}: reason may not contain '|' or newlines")
            if prev is not None and r.score > prev:
                raise TableError(f"{r.ticker}: rows not ordered by score")
            prev = r.score
        total = sum(r.weight for r in self.rows)
        if total != 100:
            raise WeightSumError(f"weights sum to {total}, expected 100")


def round_score(x: float) -> float:
    return float(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def largest_remainder(shares: Sequence[Fraction], total: int = 100) -> list[int]:
    """Hamilton apportionment; remainder ties go to the earlier row."""
    floors = [math.floor(s) for s in shares]
    left = total - sum(floors)
    order = sorted(range(len(shares)), key=lambda i: (-(shares[i] - floors[i]), i))
    for i in order[:left]:
        floors[i] += 1
    return floors


def integer_weights(scores: Sequence[float]) -> list[int]:
    """Round-half-up every row but the last, which absorbs the remainder.

    Exact rational arithmetic keeps the rounding deterministic. An all-zero
    score vector gets equal weights; a negative absorbing row falls back to
    largest-remainder apportionment.
    """
    n = len(scores)
    if n == 0:
        raise EmptyPortfolio("nothing to allocate")
    fr = [Fraction(s) for s in scores]
    if any(s < 0 for s in fr):
        raise ValueError("scores must be non-negative")
    total = sum(fr)
    if total == 0:
        return largest_remainder([Fraction(100, n)] * n)
    raw = [100 * s / total for s in fr]
    head = [math.floor(w + Fraction(1, 2)) for w in raw[:-1]]
    last = 100 - sum(head)
    if last < 0:
        return largest_remainder(raw)
    return head + [last]


# --- reasons -------------------------------------------------------------------

_GRAHAM_NOUN = {
    "current_ratio": "liquidity",
    "roe": "ROE",
    "profit_margin": "margins",
    "asset_turnover": "turnover",
    "working_capital_ratio": "working capital",
    "interest_coverage": "coverage",
}
_PENALTY_PHRASE = {
    "debt_to_equity": "high D/E",
    "interest_coverage": "thin coverage",
    "roe": "low ROE",
    "fcf": "negative FCF",
}
_BUFFETT_PHRASE = {
    "roe": "high ROE",
    "interest_coverage": "strong coverage",
    "profit_margin": "fat margins",
    "asset_turnover": "efficient assets",
    "valuation": "cash-rich valuation",
    "current_ratio": "liquid balance sheet",
    "working_capital_ratio": "ample working capital",
}
_ALTMAN_LABEL = {"Z": "Z", "Zprime": "Z'", "Zdoubleprime": "Z''"}
_RATIO_LABEL = {
    "wc_ta": "WC/TA",
    "re_ta": "RE/TA",
    "ebit_ta": "EBIT/TA",
    "mve_tl": "MVE/TL",
    "sales_ta": "Sales/TA",
    "bve_tl": "BVE/TL",
}
# signal index -> noun, in citation priority
_PIOTROSKI_NOUN = (
    (0, "ROA"),
    (7, "margins"),
    (1, "CFO"),
    (8, "turnover"),
    (5, "liquidity"),
    (2, "ROA trend"),
    (3, "accruals"),
    (4, "deleveraging"),
    (6, "share discipline"),
)


def _top2(contrib: Mapping[str, float]) -> list[str]:
    keys = list(contrib)
    return sorted(keys, key=lambda k: (-contrib[k], keys.index(k)))[:2]


def _join(words: Sequence[str]) -> str:
    return " & ".join(words)


def reason_string(components: Mapping, guru: str) -> str:
    if guru == "graham":
        text = "strong " + _join([_GRAHAM_NOUN[k] for k in _top2(components.get("contrib", {}))])
        pens = [_PENALTY_PHRASE[p] for p in components.get("penalties", [])]
        if pens:
            text += "; dinged for " + _join(pens)
    elif guru == "buffett":
        parts = [_BUFFETT_PHRASE[k] for k in _top2(components.get("contrib", {}))]
        pens = components.get("penalties", [])
        if "multiple" in pens:
            parts.append("rich multiple")
        elif components.get("has_multiple"):
            parts.append("fair multiple")
        text = ", ".join(parts)
        others = [_PENALTY_PHRASE[p] for p in pens if p in _PENALTY_PHRASE]
        if others:
            text += "; dinged for " + _join(others)
    elif guru == "greenblatt":
        half = math.ceil(components["n"] / 2)
        ey = "high" if components["rank_ey"] <= half else "low"
        roic = "high" if components["rank_roic"] <= half else "low"
        text = f"{ey} EY & ROIC" if ey == roic else f"{ey} EY, {roic} ROIC"
        nudges = ["D/E" if k == "debt_to_equity" else "coverage" for k in components.get("nudges", [])]
        if nudges:
            text += f"; mild {_join(nudges)} penalt{'ies' if len(nudges) > 1 else 'y'}"
    elif guru == "altman":
        text = f"{_ALTMAN_LABEL[components['model']]}={components['z_score']:.1f} {components['band']}"
        contrib = components.get("contrib", {})
        if contrib:
            best = _top2(contrib)[0]
            text += f"; strong {_RATIO_LABEL[best]}" if contrib[best] > 0 else "; weak ratios"
        de = components.get("debt_to_equity")
        if de is not None:
            text += "; modest D/E" if de <= 1.0 else "; high D/E"
    elif guru == "piotroski":
        signals = components["signals"]
        text = f"F={components['f_score']}/9"
        nouns = [noun for i, noun in _PIOTROSKI_NOUN if signals[i] == 1][:2]
        text += "; positive " + _join(nouns) if nouns else "; no passing signals"
    else:
        raise UnknownGuru(guru)
    return text[:MAX_REASON]


def allocate(selected: Sequence[ScoredTicker], guru: str, quarter: Optional[QuarterLabel] = None) -> PortfolioTable:
    """Weights proportional to score, in the given (ranked) order."""
    if guru not in GURUS:
        raise UnknownGuru(guru)
    if not selected:
        raise EmptyPortfolio(f"{guru}: nothing selected")
    weights = integer_weights([s.score for s in selected])
    rows = tuple(
        PortfolioRow(s.ticker, round_score(s.score), w, reason_string(s.components, guru))
        for s, w in zip(selected, weights)
    )
    table = PortfolioTable(quarter, guru, rows)
    table.validate()
    return table


# --- markdown ------------------------------------------------------------------

def render_markdown(table: PortfolioTable) -> str:
    table.validate()
    lines = [HEADER, SEPARATOR]
    for r in table.rows:
        lines.append(f"| {r.ticker} | {r.score:.2f} | {r.weight} | {r.reason} |")
    return "\n".join(lines) + "\n"


def _cells(line: str, lineno: int) -> list[str]:
    if not (line.startswith("|") and line.endswith("|")) or len(line) < 2:
        raise TableError(f"line {lineno}: not a table row: {line!r}")
    cells = [c.strip() for c in line[1:-1].split("|")]
    if len(cells) != 4:
        raise TableError(f"line {lineno}: expected 4 cells, got {len(cells)}")
    return cells


def parse_markdown(text: str, quarter: Optional[QuarterLabel] = None, guru: Optional[str] = None) -> PortfolioTable:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or lines[0] != HEADER:
        raise HeaderMismatch(f"expected header {HEADER!r}, got {lines[0] if lines else ''!r}")
    if len(lines) < 2 or not all(_SEP_CELL_RE.match(c) for c in _cells(lines[1], 2)):
        raise TableError("line 2: bad separator row")
    rows = []
    for i, line in enumerate(lines[2:], start=3):
        ticker, score, weight, reason = _cells(line, i)
        if not _SCORE_RE.match(score) or not 0.0 <= float(score) <= 1.0:
            raise BadScoreFormat(f"line {i}: score {score!r} must have 2 decimals in [0.00, 1.00]")
        if not _WEIGHT_RE.match(weight):
            raise BadWeightFormat(f"line {i}: weight {weight!r} is not a non-negative integer")
        if not reason:
            raise EmptyReason(f"line {i}: empty reason")
        rows.append(PortfolioRow(ticker, float(score), int(weight), reason))
    table = PortfolioTable(quarter, guru, tuple(rows))
    table.validate()
    return table
