"""Acceptance criteria 1-10, each at its stated tolerance.

Every test is tagged with ``criterion`` so the terminal summary prints a
single PASS/FAIL line per criterion.
"""

import datetime as dt
import hashlib
import itertools
import math

import numpy as np
import pytest

from guruscreen.backtest import gross_turnover, run_backtest
from guruscreen.cli import main
from guruscreen.ingest import DailyBar, QuarterLabel, quarter_range
from guruscreen.metrics import PiotroskiRow, altman_from_ratios, build_frame
from guruscreen.pipeline import portfolio_for
from guruscreen.portfolio import PortfolioRow, PortfolioTable, allocate, parse_markdown, render_markdown
from guruscreen.scaling import winsorize_minmax
from guruscreen.strategies import GURUS, ScoredTicker, apply_selection, rank, score_altman, score_greenblatt, score_piotroski


def criterion(title):
    def tag(fn):
        fn.criterion = title
        return fn
    return tag


# printed values: mean_daily, std_daily, mean_ann, std_ann, sharpe_daily, sharpe_ann
REFERENCE_ROWS = {
    "Benjamin Graham": (0.0008, 0.0119, 0.1921, 0.1896, 0.0638, 1.0132),
    "Warren Buffett": (0.0010, 0.0117, 0.2603, 0.1860, 0.0881, 1.3991),
    "Joel Greenblatt": (0.0005, 0.0098, 0.1342, 0.1551, 0.0545, 0.8652),
    "Joseph Piotroski": (0.0008, 0.0111, 0.2014, 0.1762, 0.0720, 1.1432),
    "Edward Altman": (0.0007, 0.0114, 0.1744, 0.1817, 0.0605, 0.9598),
    "NASDAQ 100": (0.0011, 0.0135, 0.2827, 0.2150, 0.0828, 1.3151),
    "S&P 500": (0.0010, 0.0107, 0.2500, 0.1698, 0.0928, 1.4728),
}


@criterion("AC01 annualization conventions reproduce the reference performance figures")
@pytest.mark.parametrize("row", list(REFERENCE_ROWS))
def test_ac01_reference_conventions(row):
    mean_d, std_d, mean_a, std_a, sh_d, sh_a = REFERENCE_ROWS[row]
    root = math.sqrt(252)
    assert abs(sh_d * root - sh_a) <= 0.02
    assert abs(std_d * root - std_a) <= 0.01
    assert abs(mean_a / 252 - mean_d) <= 5e-5


@criterion("AC02 Altman hand oracle z=2.695 Grey score 0.75")
def test_ac02_altman_oracle():
    row = altman_from_ratios("X", dict(wc_ta=0.1, re_ta=0.2, ebit_ta=0.15, mve_tl=1.0, sales_ta=1.2))
    assert row.model == "Z"
    assert abs(row.z_score - 2.695) <= 1e-9
    assert row.band == "Grey"
    (scored,) = score_altman([row], {})
    assert abs(scored.score - 0.75) <= 1e-9


@criterion("AC03 Greenblatt endpoints exact for N=2..50")
@pytest.mark.parametrize("n", range(2, 51))
def test_ac03_greenblatt_endpoints(n):
    rng = np.random.default_rng(n)
    ey = rng.permutation(n) + 1.0
    roic = rng.permutation(n) + 1.0
    # one name best on both metrics and one worst on both, the rest shuffled
    ey[[0, 1]], roic[[0, 1]] = [n + 1.0, 0.5], [n + 1.0, 0.5]
    inputs = {f"T{i:03d}": dict(earnings_yield=float(ey[i]) / 100, roic=float(roic[i]) / 100, ev=1.0) for i in range(n)}
    base = {s.ticker: s.components["base"] for s in score_greenblatt(inputs)}
    assert base["T000"] == 1.0
    assert base["T001"] == 0.0
    assert all(0.0 <= v <= 1.0 for v in base.values())


@criterion("AC04 Piotroski score*9 == F over all signal/NA patterns")
def test_ac04_piotroski_exact():
    rows = [PiotroskiRow(f"R{i:05d}", sig) for i, sig in enumerate(itertools.product((0, 1, None), repeat=9))]
    assert len(rows) == 3 ** 9
    by = {s.ticker: s for s in score_piotroski(rows)}
    checked = 0
    for r in rows:
        s = by[r.ticker]
        if r.evaluable >= 4:
            assert s.eligible and s.score * 9 == r.f_score
            checked += 1
        else:
            assert not s.eligible and s.score is None
    # all 2^9 fully evaluable patterns are among the checked ones
    assert checked >= 2 ** 9


@criterion("AC05 portfolio invariants on 1000 random score vectors")
def test_ac05_portfolio_invariants():
    rng = np.random.default_rng(20240)
    for case in range(1000):
        n = int(rng.integers(1, 121))
        scores = rng.random(n)
        if case % 10 == 0:
            scores[rng.random(n) < 0.3] = 0.0
        if case % 97 == 0:
            scores[:] = 0.0
        scored = rank(ScoredTicker(f"T{i:03d}", float(s), {"f_score": 5, "signals": (1,) * 9}, True, ())
                      for i, s in enumerate(scores))
        table = allocate(scored, "piotroski")
        weights = [r.weight for r in table.rows]
        assert sum(weights) == 100 and min(weights) >= 0
        assert parse_markdown(render_markdown(table), None, "piotroski") == table


@criterion("AC06 metric oracle equivalence on the seed-42 fixture")
def test_ac06_metric_oracle(universe, book, bars):
    from oracle import Oracle
    oracle = Oracle(*universe)
    n = 0
    for q in book.quarters():
        frame = build_frame(book, bars, q)
        for t in frame.tickers:
            assert frame.metrics[t] == oracle.metrics(t, q)
            model, z, band, ratios = oracle.altman(t, q)
            a = frame.altman[t]
            assert (a.model, a.z_score, a.band) == (model, z, band)
            assert {k: getattr(a, k) for k in ratios} == ratios
            p = frame.piotroski[t]
            assert (p.signals, p.roa_t, p.delta_margin) == oracle.piotroski(t, q)
            n += 1
    assert n == 140


@criterion("AC07 backtest cost law")
@pytest.mark.parametrize("guru", GURUS)
def test_ac07_cost_law(book, bars, guru):
    quarters = quarter_range(QuarterLabel(2023, 4), QuarterLabel(2025, 2))
    tables = {q: portfolio_for(guru, book, bars, q) for q in quarters}
    x = 0.0001
    one, two = run_backtest(tables, bars, x), run_backtest(tables, bars, 2 * x)
    assert one.dates == two.dates
    extra = {e.trade_date: e2.cost - e.cost for e, e2 in zip(one.events, two.events)}
    for e, e2 in zip(one.events, two.events):
        assert e.gross_turnover == e2.gross_turnover
        assert abs(e2.cost - 2 * e.cost) <= 1e-18
    eq1, eq2 = 1.0, 1.0
    for d, r1, r2, c1, c2 in zip(one.dates, one.daily_returns, two.daily_returns, one.equity_curve, two.equity_curve):
        assert abs((r1 - r2) - extra.get(d, 0.0)) <= 1e-10
        # rebuilding the 2x curve from the 1x returns minus the extra cost
        eq1 *= 1.0 + r1
        eq2 *= 1.0 + r1 - extra.get(d, 0.0)
        assert abs(eq2 - c2) <= 1e-10 * len(one.events)
        assert c1 - c2 >= -1e-15


@criterion("AC07 backtest cost law")
def test_ac07_turnover_point_two():
    def s(t, closes):
        d0 = dt.date(2024, 3, 28)
        days = [d0 + dt.timedelta(days=i) for i in range(120)]
        days = [d for d in days if d.weekday() < 5][: len(closes)]
        return tuple(DailyBar(t, d, c, c, c, c, 1, 1.0) for d, c in zip(days, closes))

    n = 70
    bars = {"A": s("A", [10.0] * n), "B": s("B", [10.0] * 4 + [15.0] * (n - 4))}
    q1, q2 = QuarterLabel(2024, 1), QuarterLabel(2024, 2)
    t1 = PortfolioTable(q1, "graham", (PortfolioRow("A", 0.5, 50, "a"), PortfolioRow("B", 0.5, 50, "b")))
    t2 = PortfolioTable(q2, "graham", (PortfolioRow("B", 0.7, 70, "b"), PortfolioRow("A", 0.3, 30, "a")))
    res = run_backtest({q1: t1, q2: t2}, bars, 0.0001)
    event = res.events[1]
    assert event.gross_turnover == 0.2
    assert event.cost == 0.00002
    assert gross_turnover({"A": 0.5, "B": 0.5}, {}) * 0.0001 == 0.0001


def _tree_digest(root):
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


@criterion("AC08 cmd_backtest --gurus all is byte-identical across runs and job counts")
def test_ac08_determinism(fixture_dir, tmp_path, capsys):
    common = ["backtest", "--gurus", "all", "--from", "2023Q4", "--to", "2025Q2",
              "--fundamentals", str(fixture_dir / "fundamentals.csv"), "--prices", str(fixture_dir / "prices.csv"),
              "--benchmarks", str(fixture_dir / "benchmarks.csv")]
    digests = []
    for i, jobs in enumerate(("1", "1", "4", "5")):
        out = tmp_path / f"run{i}"
        assert main(common + ["--outdir", str(out), "--jobs", jobs]) == 0
        digests.append(_tree_digest(out))
    capsys.readouterr()
    assert len(digests[0]) == 5 + 5 + 4 + 35
    assert all(d == digests[0] for d in digests[1:])


@criterion("AC09 selection rule counts")
@pytest.mark.parametrize("n, k", [(40, 12), (200, 30), (10, 10)])
def test_ac09_selection(n, k):
    inputs = {f"T{i:03d}": dict(earnings_yield=(i + 1) / 1000, roic=((7 * i) % n + 1) / 1000, ev=1.0) for i in range(n)}
    assert len(apply_selection(score_greenblatt(inputs), "greenblatt")) == k


@criterion("AC10 scaling: no-spread column and affine invariance")
def test_ac10_no_spread():
    for v in (7.0, -3.25, 0.0, 1e9):
        out = winsorize_minmax({f"T{i}": v for i in range(12)})
        assert all(x == 0.5 for x in out.values.values())
    out = winsorize_minmax({"a": 2.0, "b": None, "c": 2.0})
    assert out.values == {"a": 0.5, "b": None, "c": 0.5}


def _rounding_bound(col, a, b, spread):
    """Error in [0, 1] units that forming a*v + b in floats can inject on its own."""
    eps = np.finfo(float).eps
    big = max(abs(a * v) + abs(b) for v in col.values() if v is not None)
    return 4 * eps * big / (a * spread)


AFFINE = ((2.0, 0.0), (0.5, 3.0), (0.37, -5.0), (12.5, 100.0), (1e3, -7.0), (1e-3, 1.0))


def _affine_columns(book, bars):
    rng = np.random.default_rng(10)
    frame = build_frame(book, bars, QuarterLabel(2024, 4))
    columns = [{t: m[name] for t, m in frame.metrics.items()} for name in
               ("current_ratio", "roe", "profit_margin", "asset_turnover", "interest_coverage", "pe")]
    columns += [{f"T{i}": float(x) for i, x in enumerate(rng.normal(size=int(rng.integers(2, 80))))} for _ in range(200)]
    return columns


@criterion("AC10 scaling: no-spread column and affine invariance")
def test_ac10_affine(book, bars):
    checked = 0
    for col in _affine_columns(book, bars):
        base = winsorize_minmax(col)
        for a, b in AFFINE:
            if _rounding_bound(col, a, b, base.max - base.min) > 1e-13:
                continue  # the transformed floats cannot carry 1e-12; see the next test
            moved = winsorize_minmax({k: None if v is None else a * v + b for k, v in col.items()})
            for k, v in base.values.items():
                if v is None:
                    assert moved[k] is None
                else:
                    assert abs(moved[k] - v) <= 1e-12
            checked += 1
    assert checked >= 1000


def test_affine_ill_conditioned_stays_within_input_rounding(book, bars):
    # shrinking by 1e-3 onto an offset of 1.0 rounds away digits before scaling;
    # the scaler must add nothing beyond that
    for col in _affine_columns(book, bars):
        base = winsorize_minmax(col)
        for a, b in AFFINE:
            bound = _rounding_bound(col, a, b, base.max - base.min)
            moved = winsorize_minmax({k: None if v is None else a * v + b for k, v in col.items()})
            for k, v in base.values.items():
                if v is not None:
                    assert abs(moved[k] - v) <= max(1e-12, 2 * bound)
