"""Cross-sectional winsorize + min-max scaling and NA-aware weighted blends."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyColumn
from .ingest import Num


@dataclass(frozen=True)
class ScaledColumn:
    values: dict
    p5: Optional[float] = None
    p95: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None
    degenerate: bool = False

    def __getitem__(self, ticker: str) -> Num:
        return self.values[ticker]

    def get(self, ticker: str, default=None) -> Num:
        return self.values.get(ticker, default)


def winsorize_minmax(values: Mapping[str, Num], lower_q: float = 0.05, upper_q: float = 0.95) -> ScaledColumn:
    """Clamp to the 5th/95th percentiles of the non-NA values, then map to [0, 1].

    Percentiles use linear interpolation between order statistics. A column
    with no spread after clamping maps every non-NA entry to 0.50.
    """
    present = {k: float(v) for k, v in values.items() if v is not None}
    if not present:
        raise EmptyColumn("every value is NA")
    arr = np.array(list(present.values()), dtype=float)
    p5, p95 = (float(x) for x in np.percentile(arr, [100 * lower_q, 100 * upper_q], method="linear"))
    clamped = np.clip(arr, p5, p95)
    lo, hi = float(clamped.min()), float(clamped.max())
    degenerate = hi == lo
    if degenerate:
        scaled = np.full_like(clamped, 0.5)
    else:
        scaled = np.clip((clamped - lo) / (hi - lo), 0.0, 1.0)
    by_key = dict(zip(present, (float(s) for s in scaled)))
    out = {k: by_key.get(k) for k in values}
    return ScaledColumn(out, p5, p95, lo, hi, degenerate)


def invert(col: ScaledColumn) -> ScaledColumn:
    flipped = {k: None if v is None else 1.0 - v for k, v in col.values.items()}
    return ScaledColumn(flipped, col.p5, col.p95, col.min, col.max, col.degenerate)


def combine_values(pairs: Sequence[tuple[Num, float]]) -> Num:
    """NA-aware blend for one ticker: missing terms drop out and the rest are
    rescaled so their weights add back to the full total."""
    total = sum(w for _, w in pairs)
    avail = [(x, w) for x, w in pairs if x is not None]
    if not avail:
        return None
    w_avail = sum(w for _, w in avail)
    return sum(x * w for x, w in avail) * total / w_avail


def weighted_combine(components: Sequence[tuple[ScaledColumn | Mapping[str, Num], float]]) -> dict:
    if any(w <= 0 for _, w in components):
        raise ValueError("weights must be positive")
    keys: dict[str, None] = {}
    for col, _ in components:
        keys.update(dict.fromkeys(col.values if isinstance(col, ScaledColumn) else col))
    return {k: combine_values([(col.get(k), w) for col, w in components]) for k in keys}
