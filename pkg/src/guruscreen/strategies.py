"""The five guru scorers plus the shared selection rule.

Each ``score_*`` function returns every ticker it was given as a
``ScoredTicker``, sorted by rank (eligible names first). ``apply_selection``
then cuts the ranked list down to the names that enter the portfolio.

Penalty and bonus thresholds always look at raw metric values; a missing raw
value triggers neither.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import EmptyColumn, EmptyUniverse, UnknownGuru
from .ingest import Num
from .metrics import ALTMAN_MODELS, AltmanRow, MetricFrame, PiotroskiRow
from .scaling import ScaledColumn, combine_values, invert, winsorize_minmax

GURUS = ("graham", "altman", "greenblatt", "piotroski", "buffett")


def clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _hi(v: Num) -> tuple:
    # "higher is better" tie-break key; NA sorts last
    return (1, 0.0) if v is None else (0, -v)


def _lo(v: Num) -> tuple:
    return (1, 0.0) if v is None else (0, v)


@dataclass(frozen=True)
class ScoredTicker:
    ticker: str
    score: Num
    components: dict = field(default_factory=dict)
    eligible: bool = True
    tiebreak: tuple = ()

    def sort_key(self) -> tuple:
        return (not self.eligible, _hi(self.score), *self.tiebreak, self.ticker)


@dataclass(frozen=True)
class SelectionRule:
    max_k: int = 30
    fraction: Fraction = Fraction(3, 10)
    small_universe_threshold: int = 15

    def k(self, n: int) -> int:
        return min(self.max_k, math.ceil(self.fraction * n))


def rank(scored: Iterable[ScoredTicker]) -> list[ScoredTicker]:
    return sorted(scored, key=ScoredTicker.sort_key)


def _require(scored: list[ScoredTicker], guru: str) -> list[ScoredTicker]:
    if not any(s.eligible for s in scored):
        raise EmptyUniverse(f"{guru}: no eligible tickers")
    return rank(scored)


def _scale(metrics: Mapping[str, Mapping[str, Num]], name: str) -> ScaledColumn:
    col = {t: m.get(name) for t, m in metrics.items()}
    try:
        return winsorize_minmax(col)
    except EmptyColumn:
        return ScaledColumn(dict.fromkeys(col))


def _effective(pairs: Mapping[str, tuple[Num, float]]) -> dict:
    """Per-component contribution after NA renormalization."""
    total = sum(w for _, w in pairs.values())
    w_avail = sum(w for x, w in pairs.values() if x is not None)
    if w_avail == 0:
        return {}
    return {k: x * w * total / w_avail for k, (x, w) in pairs.items() if x is not None}


# --- Graham -----------------------------------------------------------------

GRAHAM_WEIGHTS = {
    "current_ratio": 0.25,
    "roe": 0.20,
    "profit_margin": 0.20,
    "asset_turnover": 0.15,
    "working_capital_ratio": 0.10,
    "interest_coverage": 0.10,
}


def graham_adjustments(raw: Mapping[str, Num]) -> tuple[list[str], list[str]]:
    penalties, bonuses = [], []
    de, ic, roe = raw.get("debt_to_equity"), raw.get("interest_coverage"), raw.get("roe")
    wc, cr = raw.get("working_capital_ratio"), raw.get("current_ratio")
    if de is not None and de > 0.5:
        penalties.append("debt_to_equity")
    if ic is not None and ic < 5:
        penalties.append("interest_coverage")
    if roe is not None and roe < 0.05:
        penalties.append("roe")
    if wc is not None and wc > 0.20:
        bonuses.append("working_capital_ratio")
    if cr is not None and cr >= 2:
        bonuses.append("current_ratio")
    return penalties, bonuses


def graham_score(scaled: Mapping[str, Num], raw: Mapping[str, Num]) -> tuple[Num, dict]:
    pairs = {k: (scaled.get(k), w) for k, w in GRAHAM_WEIGHTS.items()}
    base = combine_values(list(pairs.values()))
    if base is None:
        return None, {}
    penalties, bonuses = graham_adjustments(raw)
    score = clip01(base - 0.05 * len(penalties) + 0.05 * len(bonuses))
    return score, {"base": base, "contrib": _effective(pairs), "penalties": penalties, "bonuses": bonuses}


def score_graham(metrics: Mapping[str, Mapping[str, Num]]) -> list[ScoredTicker]:
    if not metrics:
        raise EmptyUniverse("graham: empty universe")
    scaled = {name: _scale(metrics, name) for name in GRAHAM_WEIGHTS}
    out = []
    for t, raw in metrics.items():
        score, comp = graham_score({n: scaled[n][t] for n in GRAHAM_WEIGHTS}, raw)
        tb = (_hi(raw.get("current_ratio")), _lo(raw.get("debt_to_equity")), _hi(raw.get("profit_margin")))
        out.append(ScoredTicker(t, score, comp, score is not None, tb))
    return _require(out, "graham")


# --- Altman -----------------------------------------------------------------

def altman_score(model: str, z: float) -> float:
    lower, upper = ALTMAN_MODELS[model][2]
    return clip01((z - lower) / (upper - lower))


def score_altman(rows: Iterable[AltmanRow], extras: Mapping[str, Mapping[str, Num]]) -> list[ScoredTicker]:
    rows = list(rows)
    if not rows:
        raise EmptyUniverse("altman: empty universe")
    out = []
    for r in rows:
        de = extras.get(r.ticker, {}).get("debt_to_equity")
        ok = r.z_score is not None
        score = altman_score(r.model, r.z_score) if ok else None
        contrib = {}
        if ok:
            names, coefs, _ = ALTMAN_MODELS[r.model]
            contrib = {n: c * getattr(r, n) for n, c in zip(names, coefs)}
        comp = {"model": r.model, "z_score": r.z_score, "band": r.band, "contrib": contrib, "debt_to_equity": de}
        tb = (_hi(r.z_score), _hi(r.ebit_ta), _lo(de))
        out.append(ScoredTicker(r.ticker, score, comp, ok, tb))
    return _require(out, "altman")


# --- Greenblatt ---------------------------------------------------------------

def competition_rank(values: Mapping[str, float]) -> dict[str, int]:
    """Descending "1224" ranking: ties share the best rank."""
    return {k: 1 + sum(1 for o in values.values() if o > v) for k, v in values.items()}


def greenblatt_base(combined_rank: int, n: int) -> float:
    if n == 1:
        return 1.0
    return 1.0 - (combined_rank - 2) / (2 * n - 2)


def score_greenblatt(inputs: Mapping[str, Mapping[str, Num]]) -> list[ScoredTicker]:
    if not inputs:
        raise EmptyUniverse("greenblatt: empty universe")

    def pos(v):
        return v is not None and v > 0

    eligible = {
        t: m for t, m in inputs.items() if pos(m.get("earnings_yield")) and pos(m.get("roic")) and pos(m.get("ev"))
    }
    n = len(eligible)
    r_ey = competition_rank({t: m["earnings_yield"] for t, m in eligible.items()})
    r_roic = competition_rank({t: m["roic"] for t, m in eligible.items()})
    out = []
    for t, m in inputs.items():
        tb = (_hi(m.get("earnings_yield")), _hi(m.get("roic")))
        if t not in eligible:
            out.append(ScoredTicker(t, None, {}, False, tb))
            continue
        combined = r_ey[t] + r_roic[t]
        base = greenblatt_base(combined, n)
        nudges = []
        ic, de = m.get("interest_coverage"), m.get("debt_to_equity")
        if ic is not None and ic < 3:
            nudges.append("interest_coverage")
        if de is not None and de > 1.0:
            nudges.append("debt_to_equity")
        score = clip01(base - 0.03 * len(nudges))
        comp = {"base": base, "rank_ey": r_ey[t], "rank_roic": r_roic[t], "combined_rank": combined,
                "n": n, "nudges": nudges}
        out.append(ScoredTicker(t, score, comp, True, tb))
    return _require(out, "greenblatt")


# --- Piotroski ----------------------------------------------------------------

def score_piotroski(rows: Iterable[PiotroskiRow]) -> list[ScoredTicker]:
    rows = list(rows)
    if not rows:
        raise EmptyUniverse("piotroski: empty universe")
    out = []
    for r in rows:
        ok = r.evaluable >= 4
        comp = {"f_score": r.f_score, "evaluable": r.evaluable, "signals": r.signals}
        out.append(ScoredTicker(r.ticker, r.f_score / 9.0 if ok else None, comp, ok,
                                (_hi(r.roa_t), _hi(r.delta_margin))))
    return _require(out, "piotroski")


# --- Buffett ------------------------------------------------------------------

BUFFETT_BASE = {
    "roe": 0.28,
    "interest_coverage": 0.22,
    "profit_margin": 0.18,
    "asset_turnover": 0.12,
    "valuation": 0.10,
    "current_ratio": 0.05,
    "working_capital_ratio": 0.05,
}
BUFFETT_VALUATION = {"fcf_yield": 0.55, "pb": 0.25, "pe": 0.20}
BUFFETT_QUALITY = {
    "roce": 0.18,
    "cash_conversion": 0.10,
    "margin_stability": 0.06,
    "buyback_yield": 0.04,
    "capex_intensity": -0.06,
}
BUFFETT_SCALED = (
    [k for k in BUFFETT_BASE if k != "valuation"] + list(BUFFETT_VALUATION) + list(BUFFETT_QUALITY)
)
_INVERTED = ("pe", "pb")


def buffett_adjustments(raw: Mapping[str, Num]) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    g = raw.get
    bonuses, penalties = [], []
    if g("roe") is not None and g("debt_to_equity") is not None and g("roe") >= 0.15 and g("debt_to_equity") <= 0.5:
        bonuses.append(("roe_de", 0.05))
    if g("interest_coverage") is not None and g("interest_coverage") >= 10:
        bonuses.append(("interest_coverage", 0.03))
    if g("profit_margin") is not None and g("profit_margin") >= 0.15:
        bonuses.append(("profit_margin", 0.02))
    if g("owner_earnings_yield") is not None and g("owner_earnings_yield") >= 0.05:
        bonuses.append(("owner_earnings_yield", 0.03))
    if g("buyback_yield") is not None and g("buyback_yield") >= 0.02:
        bonuses.append(("buyback_yield", 0.02))
    de = g("debt_to_equity")
    if de is not None and de > 1.0:
        penalties.append(("debt_to_equity", 0.08))
        if de > 2.0:
            penalties.append(("debt_to_equity_extreme", 0.05))
    if g("interest_coverage") is not None and g("interest_coverage") < 5:
        penalties.append(("interest_coverage", 0.05))
    if (g("pe") is not None and g("pe") > 35) or (g("pb") is not None and g("pb") > 6):
        penalties.append(("multiple", 0.05))
    if g("fcf_ttm") is not None and g("fcf_ttm") <= 0:
        penalties.append(("fcf", 0.08))
    return bonuses, penalties


def buffett_valuation(scaled: Mapping[str, Num]) -> float:
    """``scaled`` holds PE/PB already flipped to higher-is-better."""
    v = combine_values([(scaled.get(k), w) for k, w in BUFFETT_VALUATION.items()])
    return 0.5 if v is None else v


def buffett_quality(scaled: Mapping[str, Num]) -> float:
    """Signed blend; renormalized on absolute weights, 0 when nothing is available."""
    total = sum(abs(w) for w in BUFFETT_QUALITY.values())
    avail = [(scaled[k], w) for k, w in BUFFETT_QUALITY.items() if scaled.get(k) is not None]
    if not avail:
        return 0.0
    return sum(x * w for x, w in avail) * total / sum(abs(w) for _, w in avail)


def buffett_score(scaled: Mapping[str, Num], raw: Mapping[str, Num]) -> tuple[Num, dict]:
    if all(scaled.get(k) is None for k in BUFFETT_BASE if k != "valuation"):
        return None, {}
    valuation = buffett_valuation(scaled)
    pairs = {k: (valuation if k == "valuation" else scaled.get(k), w) for k, w in BUFFETT_BASE.items()}
    base = combine_values(list(pairs.values()))
    quality = buffett_quality(scaled)
    bonuses, penalties = buffett_adjustments(raw)
    adj = sum(b for _, b in bonuses) - sum(p for _, p in penalties)
    score = clip01(base + quality + adj)
    comp = {
        "base": base,
        "valuation": valuation,
        "quality": quality,
        "contrib": _effective(pairs),
        "bonuses": [k for k, _ in bonuses],
        "penalties": [k for k, _ in penalties],
        "has_multiple": raw.get("pe") is not None or raw.get("pb") is not None,
    }
    return score, comp


def score_buffett(metrics: Mapping[str, Mapping[str, Num]]) -> list[ScoredTicker]:
    if not metrics:
        raise EmptyUniverse("buffett: empty universe")
    cols = {}
    for name in BUFFETT_SCALED:
        col = _scale(metrics, name)
        cols[name] = invert(col) if name in _INVERTED else col
    out = []
    for t, raw in metrics.items():
        score, comp = buffett_score({n: cols[n][t] for n in cols}, raw)
        tb = (_hi(raw.get("roe")), _hi(raw.get("interest_coverage")), _lo(raw.get("debt_to_equity")),
              _hi(raw.get("profit_margin")), _hi(raw.get("roce")))
        out.append(ScoredTicker(t, score, comp, score is not None, tb))
    return _require(out, "buffett")


# --- selection & dispatch -------------------------------------------------------

def apply_selection(scored: Sequence[ScoredTicker], guru: str, rule: SelectionRule = SelectionRule()) -> list[ScoredTicker]:
    if guru not in GURUS:
        raise UnknownGuru(guru)
    ranked = [s for s in rank(scored) if s.eligible]
    n = len(ranked)
    if guru in ("graham", "buffett") or n < rule.small_universe_threshold:
        return ranked
    k = rule.k(n)
    if guru == "greenblatt":
        return ranked[:k]
    if guru == "altman":
        safe = [s for s in ranked if s.components.get("band") == "Safe"]
        if len(safe) >= rule.small_universe_threshold:
            return safe
        room = max(0, k - len(safe))
        grey = [s for s in ranked if s.components.get("band") == "Grey"][:room]
        return rank(safe + grey)
    # piotroski: F >= 4 first, topped up to K down the ranking
    preferred = [s for s in ranked if s.components["f_score"] >= 4]
    if len(preferred) >= rule.small_universe_threshold:
        return preferred
    return ranked[: max(len(preferred), k)]


def score_frame(guru: str, frame: MetricFrame) -> list[ScoredTicker]:
    if guru == "graham":
        return score_graham(frame.metrics)
    if guru == "altman":
        return score_altman(frame.altman.values(), frame.metrics)
    if guru == "greenblatt":
        return score_greenblatt(frame.metrics)
    if guru == "piotroski":
        return score_piotroski(frame.piotroski.values())
    if guru == "buffett":
        return score_buffett(frame.metrics)
    raise UnknownGuru(guru)


def select(guru: str, frame: MetricFrame, rule: SelectionRule = SelectionRule()) -> list[ScoredTicker]:
    return apply_selection(score_frame(guru, frame), guru, rule)
