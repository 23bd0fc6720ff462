"""Quarterly-rebalanced backtest of all five screens against two index series.

Run:  python3 demos/03_backtest_and_report.py
"""

from guruscreen import GURUS, QuarterLabel, compare, perf, portfolio_for, run_backtest
from guruscreen.backtest import benchmark_returns
from guruscreen.fixtures import generate_benchmarks, generate_universe
from guruscreen.ingest import Fundamentals, quarter_range

rows, bars = generate_universe(n_tickers=20, seed=42)
book = Fundamentals(rows)
quarters = quarter_range(QuarterLabel(2023, 4), QuarterLabel(2025, 2))

series = {}
for guru in GURUS:
    tables = {q: portfolio_for(guru, book, bars, q) for q in quarters}
    result = run_backtest(tables, bars, cost_rate=0.0001)
    series[guru] = result.daily_returns
    dates = result.dates
    paid = sum(e.cost for e in result.events)
    print(f"{guru:10} {len(result.events)} rebalances, total cost {paid * 1e4:.2f} bp, "
          f"final equity {result.equity_curve[-1]:.4f}")

for name, closes in generate_benchmarks(bars, seed=7).items():
    series[name] = benchmark_returns(closes, dates, name)

reports = {name: perf(r) for name, r in series.items()}
cols = ("cagr_pct", "std_ann", "sharpe_ann", "mdd_pct", "var90_pct", "cvar90_pct")
print(f"\n{'strategy':10}" + "".join(f"{c:>12}" for c in cols))
for row in compare(reports, decimals=4):
    cells = []
    for c in cols:
        star = {"best": "*", "second": "+"}.get(row[c + "_mark"], " ")
        cells.append(f"{row[c]:>11.4f}{star}" if row[c] is not None else f"{'NA':>12}")
    print(f"{row['strategy']:10}" + "".join(cells))
print("\n* best, + second best per column")
