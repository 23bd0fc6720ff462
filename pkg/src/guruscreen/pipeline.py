"""Metric collection -> scoring -> portfolio construction for one quarter."""

from __future__ import annotations

from typing import Mapping, Sequence

from .errors import EmptyUniverse, UnknownGuru
from .ingest import DailyBar, Fundamentals, QuarterLabel
from .metrics import MetricFrame, build_frame
from .portfolio import PortfolioTable, allocate
from .strategies import GURUS, SelectionRule, select


def resolve_gurus(spec: str | Sequence[str]) -> list[str]:
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    names = [n.strip().lower() for n in names if n.strip()]
    if names == ["all"]:
        return list(GURUS)
    for n in names:
        if n not in GURUS:
            raise UnknownGuru(f"unknown guru {n!r}; choose from {', '.join(GURUS)} or 'all'")
    if not names:
        raise UnknownGuru("no guru given")
    return names


def frame_for(book: Fundamentals, bars: Mapping[str, Sequence[DailyBar]], q: QuarterLabel) -> MetricFrame:
    if not book.tickers(q):
        raise EmptyUniverse(f"no fundamentals for {q}")
    return build_frame(book, bars, q)


def portfolio_for(
    guru: str,
    book: Fundamentals,
    bars: Mapping[str, Sequence[DailyBar]],
    q: QuarterLabel,
    rule: SelectionRule = SelectionRule(),
    frame: MetricFrame | None = None,
) -> PortfolioTable:
    if guru not in GURUS:
        raise UnknownGuru(guru)
    frame = frame or frame_for(book, bars, q)
    return allocate(select(guru, frame, rule), guru, q)
