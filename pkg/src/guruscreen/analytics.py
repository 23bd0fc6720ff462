"""Daily-return performance statistics and the strategy comparison table.

Conventions: 252 trading days per year, zero risk-free rate, sample (n-1)
standard deviation, CAGR compounded over trading days.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import TooFewObservations

PERIODS = 252


@dataclass(frozen=True)
class PerfReport:
    cagr_pct: float
    mean_daily: float
    std_daily: float
    mean_ann: float
    std_ann: float
    sharpe_daily: Optional[float]
    sharpe_ann: Optional[float]
    mdd_pct: float
    var90_pct: float
    cvar90_pct: float

    def to_dict(self) -> dict:
        return asdict(self)


FIELDS = tuple(f.name for f in fields(PerfReport))
# True where larger is better
HIGHER_IS_BETTER = {
    "cagr_pct": True,
    "mean_daily": True,
    "std_daily": False,
    "mean_ann": True,
    "std_ann": False,
    "sharpe_daily": True,
    "sharpe_ann": True,
    "mdd_pct": True,
    "var90_pct": True,
    "cvar90_pct": True,
}


def max_drawdown_pct(returns: Sequence[float]) -> float:
    equity = np.cumprod(1.0 + np.asarray(returns, dtype=float))
    peak = np.maximum.accumulate(np.maximum(equity, 1.0))
    return float(np.min(equity / peak - 1.0) * 100.0)


def perf(returns: Sequence[float]) -> PerfReport:
    r = np.asarray(returns, dtype=float)
    n = len(r)
    if n < 2:
        raise TooFewObservations(f"need at least 2 daily returns, got {n}")
    growth = float(np.prod(1.0 + r))
    cagr = (growth ** (PERIODS / n) - 1.0) * 100.0
    mean = float(np.mean(r))
    # a flat series is exactly zero-variance; np.std can leave ~1e-19 of noise
    std = 0.0 if r.max() == r.min() else float(np.std(r, ddof=1))
    sharpe = mean / std if std > 0 else None
    tail = np.sort(r)[: math.ceil(0.1 * n)]
    return PerfReport(
        cagr_pct=cagr,
        mean_daily=mean,
        std_daily=std,
        mean_ann=PERIODS * mean,
        std_ann=math.sqrt(PERIODS) * std,
        sharpe_daily=sharpe,
        sharpe_ann=None if sharpe is None else math.sqrt(PERIODS) * sharpe,
        mdd_pct=max_drawdown_pct(r),
        var90_pct=float(np.percentile(r, 10, method="linear")) * 100.0,
        cvar90_pct=float(np.mean(tail)) * 100.0,
    )


def compare(reports: Mapping[str, PerfReport], decimals: Optional[int] = None) -> list[dict]:
    """One row per strategy with a ``<field>_mark`` of "best", "second" or "".

    Marks rank distinct values, so ties share a mark. ``decimals`` rounds
    before comparing, as a printed table would.
    """
    rows = [{"strategy": name, **rep.to_dict()} for name, rep in reports.items()]
    for col in FIELDS:
        def key(v):
            if v is None:
                return None
            return round(v, decimals) if decimals is not None else v

        distinct = sorted({key(r[col]) for r in rows if r[col] is not None}, reverse=HIGHER_IS_BETTER[col])
        for r in rows:
            k = key(r[col])
            mark = ""
            if k is not None and distinct:
                if k == distinct[0]:
                    mark = "best"
                elif len(distinct) > 1 and k == distinct[1]:
                    mark = "second"
            r[col + "_mark"] = mark
    return rows


def _cell(v) -> str:
    if v is None:
        return "NA"
    return repr(v) if isinstance(v, float) else str(v)


def write_reports_csv(reports: Mapping[str, PerfReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("strategy",) + FIELDS)
        for name, rep in reports.items():
            w.writerow([name] + [_cell(getattr(rep, f)) for f in FIELDS])


def write_reports_json(reports: Mapping[str, PerfReport], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: v.to_dict() for k, v in reports.items()}, fh, indent=2, sort_keys=False)
        fh.write("\n")


def write_comparison_csv(rows: Sequence[dict], path) -> None:
    cols = ["strategy"]
    for f in FIELDS:
        cols += [f, f + "_mark"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r[c]) for c in cols])
