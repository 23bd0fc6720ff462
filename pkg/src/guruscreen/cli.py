"""Batch entry point.

Exit codes: 0 ok, 1 usage, 2 data, 3 empty portfolio; ``validate`` also
returns 4 (minor divergence) and 5 (major divergence).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytics
from .agent_io import render_prompt, validate_external
from .backtest import DEFAULT_COST_RATE, benchmark_returns, run_backtest
from .errors import (
    DataError,
    EmptyPortfolio,
    EmptyUniverse,
    MalformedQuarter,
    RowError,
    UnknownGuru,
)
from .fixtures import generate_benchmarks, generate_universe, write_benchmarks
from .ingest import (
    load_bars,
    load_benchmarks,
    load_fundamentals,
    parse_quarter,
    quarter_range,
    write_bars,
    write_fundamentals,
)
from .pipeline import frame_for, portfolio_for, resolve_gurus
from .portfolio import render_markdown

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_EMPTY, EXIT_MINOR, EXIT_MAJOR = 0, 1, 2, 3, 4, 5

log = logging.getLogger("guruscreen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _quarter(text):
    try:
        return parse_quarter(text)
    except MalformedQuarter as exc:
        raise UsageError(str(exc)) from None


def _guru(name):
    try:
        (g,) = resolve_gurus(name)
    except (UnknownGuru, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return g


def _load(args):
    return load_fundamentals(args.fundamentals), load_bars(args.prices)


def _emit(text: str, out) -> None:
    if out:
        _atomic_write_text(Path(out), text)
    else:
        sys.stdout.write(text)


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


# --- commands ------------------------------------------------------------------

def cmd_score(args) -> int:
    _require(args, "guru", "quarter", "fundamentals", "prices")
    guru, q = _guru(args.guru), _quarter(args.quarter)
    book, bars = _load(args)
    _emit(render_markdown(portfolio_for(guru, book, bars, q)), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    _require(args, "guru", "quarter", "external", "fundamentals", "prices")
    guru, q = _guru(args.guru), _quarter(args.quarter)
    book, bars = _load(args)
    engine = portfolio_for(guru, book, bars, q)
    text = Path(args.external).read_text(encoding="utf-8")
    report = validate_external(text, engine)
    _emit(report.to_json(), args.out)
    return {"match": EXIT_OK, "minor": EXIT_MINOR, "major": EXIT_MAJOR}[report.verdict]


def _run_guru(guru, quarters, book, bars, cost_rate):
    tables = {}
    frames = {}
    for q in quarters:
        frames.setdefault(q, frame_for(book, bars, q))
        tables[q] = portfolio_for(guru, book, bars, q, frame=frames[q])
    return tables, run_backtest(tables, bars, cost_rate)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_backtest(args) -> int:
    _require(args, "gurus", "from_q", "to_q", "fundamentals", "prices", "outdir")
    try:
        gurus = resolve_gurus(args.gurus)
    except UnknownGuru as exc:
        raise UsageError(str(exc)) from None
    start, end = _quarter(args.from_q), _quarter(args.to_q)
    if end < start:
        raise UsageError(f"--from {start} is after --to {end}")
    if args.cost_bps < 0:
        raise UsageError("--cost-bps must be >= 0")
    outdir = Path(args.outdir)
    if outdir.exists() and (not outdir.is_dir() or any(outdir.iterdir())):
        raise UsageError(f"{outdir} exists and is not an empty directory")
    cost_rate = args.cost_bps / 10_000.0
    quarters = quarter_range(start, end)
    book, bars = _load(args)
    benchmarks = load_benchmarks(args.benchmarks) if args.benchmarks else {}

    jobs = max(1, int(args.jobs or 1))
    if jobs == 1:
        results = {g: _run_guru(g, quarters, book, bars, cost_rate) for g in gurus}
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {g: pool.submit(_run_guru, g, quarters, book, bars, cost_rate) for g in gurus}
            results = {g: futures[g].result() for g in gurus}

    dates = results[gurus[0]][1].dates
    series = {g: results[g][1].daily_returns for g in gurus}
    for name, closes in benchmarks.items():
        series[name] = benchmark_returns(closes, dates, name)

    outdir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(dir=outdir.parent, prefix=f".{outdir.name}.tmp-"))
    try:
        (tmp / "tables").mkdir()
        for g in gurus:
            tables, result = results[g]
            result.write_ledger(tmp / f"ledger_{g}.csv")
            for q, table in tables.items():
                (tmp / "tables" / f"{g}_{q}.md").write_text(render_markdown(table), encoding="utf-8")
            names = sorted({t for table in tables.values() for t in table.tickers})
            _write_csv(tmp / f"weights_{g}.csv", ["quarter"] + names,
                       [[str(q)] + [tables[q].weights().get(t, 0) for t in names] for q in quarters])
        reports = {name: analytics.perf(r) for name, r in series.items()}
        analytics.write_reports_json(reports, tmp / "perf.json")
        analytics.write_reports_csv(reports, tmp / "perf.csv")
        analytics.write_comparison_csv(analytics.compare(reports), tmp / "comparison.csv")
        cum = {name: 1.0 for name in series}
        rows = []
        for i, d in enumerate(dates):
            row = [d.isoformat()]
            for name, r in series.items():
                cum[name] *= 1.0 + r[i]
                row.append(repr(cum[name] - 1.0))
            rows.append(row)
        _write_csv(tmp / "cumulative_returns.csv", ["date"] + list(series), rows)
        if outdir.exists():
            outdir.rmdir()
        os.replace(tmp, outdir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    for g in gurus:
        for w in results[g][1].warnings:
            print(f"warning: {g}: {w}", file=sys.stderr)
    print(f"wrote {len(gurus)} ledgers to {outdir}", file=sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    _require(args, "outdir")
    start, end = _quarter(args.from_q or "2022Q1"), _quarter(args.to_q or "2025Q2")
    if end < start:
        raise UsageError(f"--from {start} is after --to {end}")
    if args.n_tickers < 1:
        raise UsageError("--n-tickers must be >= 1")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows, bars = generate_universe(args.n_tickers, start, end, args.seed)
    write_fundamentals(rows, outdir / "fundamentals.csv")
    write_bars(bars, outdir / "prices.csv")
    write_benchmarks(generate_benchmarks(bars, args.seed + 1), outdir / "benchmarks.csv")
    return EXIT_OK


def cmd_prompt(args) -> int:
    _require(args, "guru")
    asset = render_prompt(_guru(args.guru))
    sys.stdout.write(asset.text)
    return EXIT_OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="guruscreen", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file of option defaults; flags override")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def data_opts(sp):
        sp.add_argument("--fundamentals", help="fundamentals.csv")
        sp.add_argument("--prices", help="prices.csv")

    sp = sub.add_parser("score", help="score one quarter and print the portfolio table")
    sp.add_argument("--guru")
    sp.add_argument("--quarter")
    data_opts(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("backtest", help="quarterly backtest over a range of quarters")
    sp.add_argument("--gurus", default="all")
    sp.add_argument("--from", dest="from_q")
    sp.add_argument("--to", dest="to_q")
    sp.add_argument("--cost-bps", type=float, default=DEFAULT_COST_RATE * 10_000)
    data_opts(sp)
    sp.add_argument("--benchmarks", help="long-format name,date,close CSV")
    sp.add_argument("--outdir")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_backtest)

    sp = sub.add_parser("validate", help="compare an external table with the engine's")
    sp.add_argument("--guru")
    sp.add_argument("--quarter")
    sp.add_argument("--external")
    data_opts(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("generate", help="write the synthetic fixture universe")
    sp.add_argument("--outdir")
    sp.add_argument("--n-tickers", type=int, default=10)
    sp.add_argument("--from", dest="from_q")
    sp.add_argument("--to", dest="to_q")
    sp.add_argument("--seed", type=int, default=42)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("prompt", help="print a guru system prompt")
    sp.add_argument("--guru")
    sp.set_defaults(func=cmd_prompt)
    return p


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad config {known.config}: {exc}") from None
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    defaults = {{"from": "from_q", "to": "to_q"}.get(k, k): v for k, v in defaults.items()}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RowError as exc:
        for lineno, msg in exc.problems:
            print(f"{exc.path}:{lineno}: {msg}", file=sys.stderr)
        return EXIT_DATA
    except (EmptyUniverse, EmptyPortfolio) as exc:
        print(f"empty portfolio: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
