"""Check a table produced outside the engine (for example a chat model's reply).

The engine's own table is rendered, lightly edited to mimic an external
answer, and compared. Run:  python3 demos/04_validate_external_table.py
"""

from guruscreen import QuarterLabel, portfolio_for, render_markdown
from guruscreen.agent_io import render_prompt, validate_external
from guruscreen.errors import TableError
from guruscreen.fixtures import generate_universe
from guruscreen.ingest import Fundamentals

rows, bars = generate_universe(n_tickers=10, seed=42)
book = Fundamentals(rows)
q = QuarterLabel(2024, 3)
engine = portfolio_for("greenblatt", book, bars, q)

prompt = render_prompt("greenblatt")
print(f"prompt asset: {len(prompt.text)} chars, sha256 {prompt.checksum[:12]}...")
print(prompt.text.splitlines()[0], "\n")

text = render_markdown(engine)
print("self-check:", validate_external(text, engine).verdict)

# move two points of weight from the last row to the first
lines = text.splitlines()
first, last = lines[2].split(" | "), lines[-1].split(" | ")
first[2], last[2] = str(int(first[2]) + 2), str(int(last[2]) - 2)
lines[2], lines[-1] = " | ".join(first), " | ".join(last)
report = validate_external("\n".join(lines), engine)
print("edited weights:", report.verdict, "max |dw| =", report.max_weight_delta)

try:
    validate_external(text.replace("| 1", "| 2", 1), engine)
except TableError as exc:
    print("malformed reply rejected:", type(exc).__name__, "-", exc)
