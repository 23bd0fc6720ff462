"""Metrics for one quarter of the synthetic universe, then cross-sectional scaling.

Run:  python3 demos/01_metrics_and_scaling.py
"""

from guruscreen.fixtures import generate_universe
from guruscreen.ingest import Fundamentals, QuarterLabel
from guruscreen.metrics import build_frame
from guruscreen.scaling import winsorize_minmax

rows, bars = generate_universe(n_tickers=10, seed=42)
book = Fundamentals(rows)
q = QuarterLabel(2024, 4)
frame = build_frame(book, bars, q)


def fmt(v, spec=".3f"):
    return "NA" if v is None else format(v, spec)


print(f"{q}: {len(frame.tickers)} tickers\n")
print(f"{'ticker':8} {'CR':>7} {'ROE':>7} {'D/E':>7} {'EY':>7} {'ROIC':>7}  Altman")
for t in frame.tickers:
    m, a = frame.metrics[t], frame.altman[t]
    print(f"{t:8} {fmt(m['current_ratio']):>7} {fmt(m['roe']):>7} {fmt(m['debt_to_equity']):>7} "
          f"{fmt(m['earnings_yield']):>7} {fmt(m['roic']):>7}  {a.model} z={fmt(a.z_score, '.2f')} {a.band}")

# NA cells stay NA all the way through; nothing is imputed
col = winsorize_minmax({t: frame.metrics[t]["roic"] for t in frame.tickers})
print(f"\nROIC clamp range [{col.p5:.4f}, {col.p95:.4f}]")
for t in frame.tickers:
    print(f"  {t}  raw {fmt(frame.metrics[t]['roic'], '.4f'):>8}  scaled {fmt(col[t], '.3f')}")
