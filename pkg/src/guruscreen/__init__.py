"""Rule-based quarterly equity screens after five classic investors, with a daily backtester."""

from .analytics import PerfReport, compare, perf
from .backtest import BacktestResult, run_backtest
from .ingest import QuarterLabel, load_bars, load_benchmarks, load_fundamentals, parse_quarter
from .metrics import build_frame
from .pipeline import portfolio_for, resolve_gurus
from .portfolio import PortfolioTable, allocate, parse_markdown, render_markdown
from .strategies import GURUS, SelectionRule, score_frame, select

__all__ = [
    "GURUS", "BacktestResult", "PerfReport", "PortfolioTable", "QuarterLabel", "SelectionRule",
    "allocate", "build_frame", "compare", "load_bars", "load_benchmarks", "load_fundamentals",
    "parse_markdown", "parse_quarter", "perf", "portfolio_for", "render_markdown", "resolve_gurus",
    "run_backtest", "score_frame", "select",
]
__version__ = "0.1.0"
