"""System-prompt assets and comparison of externally produced tables with the engine."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import resources

from .errors import UnknownGuru
from .portfolio import PortfolioTable, parse_markdown
from .strategies import GURUS


@dataclass(frozen=True)
class PromptAsset:
    guru: str
    text: str
    checksum: str


def render_prompt(guru: str) -> PromptAsset:
    if guru not in GURUS:
        raise UnknownGuru(guru)
    text = resources.files("guruscreen").joinpath("prompts", f"{guru}.txt").read_text(encoding="utf-8")
    return PromptAsset(guru, text, hashlib.sha256(text.encode("utf-8")).hexdigest())


@dataclass
class DivergenceReport:
    in_both: list
    only_external: list
    only_engine: list
    score_deltas: dict = field(default_factory=dict)
    weight_deltas: dict = field(default_factory=dict)
    verdict: str = "match"

    @property
    def max_weight_delta(self) -> int:
        return max((abs(v) for v in self.weight_deltas.values()), default=0)

    def to_json(self) -> str:
        return json.dumps({**asdict(self), "max_weight_delta": self.max_weight_delta}, indent=2) + "\n"


def compare_tables(external: PortfolioTable, engine: PortfolioTable) -> DivergenceReport:
    ext, eng = external.weights(), engine.weights()
    ext_s = {r.ticker: r.score for r in external.rows}
    eng_s = {r.ticker: r.score for r in engine.rows}
    both = sorted(set(ext) & set(eng))
    # deltas are external minus engine
    report = DivergenceReport(
        in_both=both,
        only_external=sorted(set(ext) - set(eng)),
        only_engine=sorted(set(eng) - set(ext)),
        score_deltas={t: round(ext_s[t] - eng_s[t], 2) for t in both},
        weight_deltas={t: ext[t] - eng[t] for t in both},
    )
    if report.only_external or report.only_engine:
        report.verdict = "major"
    elif report.max_weight_delta > 1:
        report.verdict = "minor"
    return report


def validate_external(table_text: str, engine_table: PortfolioTable) -> DivergenceReport:
    """Parse an external reply (parser errors propagate) and diff it against the engine."""
    external = parse_markdown(table_text, engine_table.quarter, engine_table.guru)
    return compare_tables(external, engine_table)
