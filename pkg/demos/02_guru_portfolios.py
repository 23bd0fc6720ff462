"""Score one quarter with every guru and print the four-column tables.

Run:  python3 demos/02_guru_portfolios.py [QUARTER]
"""

import sys

from guruscreen import GURUS, QuarterLabel, parse_quarter, portfolio_for, render_markdown
from guruscreen.fixtures import generate_universe
from guruscreen.ingest import Fundamentals

q = parse_quarter(sys.argv[1]) if len(sys.argv) > 1 else QuarterLabel(2024, 2)
rows, bars = generate_universe(n_tickers=25, seed=42)
book = Fundamentals(rows)

for guru in GURUS:
    table = portfolio_for(guru, book, bars, q)
    print(f"## {guru} {q}  ({len(table.rows)} names)\n")
    print(render_markdown(table))
