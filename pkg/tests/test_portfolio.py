from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from guruscreen.errors import BadScoreFormat, BadWeightFormat, EmptyPortfolio, EmptyReason, HeaderMismatch, TableError, WeightSumError
from guruscreen.ingest import QuarterLabel
from guruscreen.metrics import build_frame
from guruscreen.portfolio import (
    HEADER,
    SEPARATOR,
    PortfolioRow,
    PortfolioTable,
    allocate,
    integer_weights,
    largest_remainder,
    parse_markdown,
    reason_string,
    render_markdown,
    round_score,
)
from guruscreen.strategies import GURUS, ScoredTicker, select


@pytest.mark.parametrize("scores, weights", [
    ([0.5, 0.3, 0.2], [50, 30, 20]),
    ([1, 1, 1], [33, 33, 34]),
    ([0.7, 0.2, 0.1], [70, 20, 10]),
    ([0.0, 0.0, 0.0], [34, 33, 33]),
    ([0.3], [100]),
])
def test_integer_weights_examples(scores, weights):
    assert integer_weights(scores) == weights


def test_negative_remainder_falls_back():
    # 0.5 rounds up on every head row, pushing the last row below zero
    scores = [1.0] * 200
    w = integer_weights(scores)
    assert sum(w) == 100 and min(w) >= 0
    assert w == largest_remainder([Fraction(100, 200)] * 200)


def test_half_up_is_exact():
    # 100 * 0.125 / 1.0 = 12.5 exactly; rounds up
    assert integer_weights([0.125, 0.875]) == [13, 87]


def test_round_score():
    assert [round_score(x) for x in (0.125, 0.135, 0.994, 0.995, 2 / 3)] == [0.13, 0.14, 0.99, 1.0, 0.67]


@given(st.lists(st.floats(0, 1), min_size=1, max_size=120))
def test_weights_property(scores):
    w = integer_weights(scores)
    assert sum(w) == 100 and min(w) >= 0
    total = sum(Fraction(s) for s in scores)
    if total == 0:
        return
    raw = [100 * Fraction(s) / total for s in scores]
    far = sum(1 for wi, ri in zip(w, raw) if abs(wi - ri) > 1)
    assert far <= max(1, len(scores) // 2)


def test_reason_examples():
    graham = dict(contrib={"current_ratio": 0.25, "profit_margin": 0.2, "roe": 0.1}, penalties=["debt_to_equity"])
    assert reason_string(graham, "graham") == "strong liquidity & margins; dinged for high D/E"
    pio = dict(f_score=4, signals=(1, 0, 0, 0, 0, 0, 0, 1, 0))
    assert reason_string(pio, "piotroski") == "F=4/9; positive ROA & margins"
    buff = dict(contrib={"roe": 0.28, "interest_coverage": 0.2, "profit_margin": 0.1}, penalties=[], has_multiple=True)
    assert reason_string(buff, "buffett") == "high ROE, strong coverage, fair multiple"
    gb = dict(rank_ey=1, rank_roic=2, n=10, nudges=["debt_to_equity"])
    assert reason_string(gb, "greenblatt") == "high EY & ROIC; mild D/E penalty"
    alt = dict(model="Zprime", z_score=3.14, band="Safe", contrib={"ebit_ta": 0.5, "wc_ta": 0.1}, debt_to_equity=0.4)
    assert reason_string(alt, "altman") == "Z'=3.1 Safe; strong EBIT/TA; modest D/E"


def table(rows, quarter=None, guru=None):
    return PortfolioTable(quarter, guru, tuple(PortfolioRow(*r) for r in rows))


def test_render_parse_roundtrip():
    t = table([("AAA", 0.9, 60, "strong liquidity"), ("BBB", 0.6, 40, "high ROE")])
    text = render_markdown(t)
    assert text.splitlines()[:2] == [HEADER, SEPARATOR]
    assert text.splitlines()[2] == "| AAA | 0.90 | 60 | strong liquidity |"
    assert parse_markdown(text) == t
    assert render_markdown(parse_markdown(text)) == text


def test_parse_accepts_other_dash_counts():
    text = f"{HEADER}\n|---|---|---|---|\n| AAA | 1.00 | 100 | ok |\n"
    assert parse_markdown(text).rows[0].weight == 100


@pytest.mark.parametrize("body, err", [
    ("| AAA | 0.60 | 60 | a |\n| BBB | 0.40 | 41 | b |", WeightSumError),
    ("| AAA | 0.5 | 100 | a |", BadScoreFormat),
    ("| AAA | 1.50 | 100 | a |", BadScoreFormat),
    ("| AAA | 0.50 | 99.5 | a |", BadWeightFormat),
    ("| AAA | 0.50 | 100 |  |", EmptyReason),
    ("| AAA | 0.40 | 50 | a |\n| BBB | 0.60 | 50 | b |", TableError),
    ("| AAA | 0.50 | 50 | a |\n| AAA | 0.50 | 50 | b |", TableError),
    ("| AAA | 0.50 | 100 |", TableError),
])
def test_parse_errors(body, err):
    with pytest.raises(err):
        parse_markdown(f"{HEADER}\n{SEPARATOR}\n{body}\n")


def test_parse_header_and_separator():
    with pytest.raises(HeaderMismatch):
        parse_markdown("| Ticker | Score | Weight | Reason |\n" + SEPARATOR + "\n| A | 1.00 | 100 | x |\n")
    with pytest.raises(TableError):
        parse_markdown(HEADER + "\n|--|--|--|--|\n| A | 1.00 | 100 | x |\n")
    with pytest.raises(EmptyPortfolio):
        parse_markdown(HEADER + "\n" + SEPARATOR + "\n")


def test_allocate_empty():
    with pytest.raises(EmptyPortfolio):
        allocate([], "graham")


row_st = st.tuples(st.integers(0, 100), st.from_regex(r"[A-Za-z][A-Za-z &;,'/=.0-9]{0,40}[A-Za-z0-9]", fullmatch=True))


@given(st.lists(row_st, min_size=1, max_size=30))
def test_roundtrip_property(items):
    scores = sorted((s / 100 for s, _ in items), reverse=True)
    weights = integer_weights(scores)
    t = table([(f"T{i:02d}", s, w, r) for i, (s, w, (_, r)) in enumerate(zip(scores, weights, items))])
    assert parse_markdown(render_markdown(t)) == t


@pytest.mark.parametrize("guru", GURUS)
def test_allocate_on_fixture(book, bars, guru):
    q = QuarterLabel(2024, 2)
    t = allocate(select(guru, build_frame(book, bars, q)), guru, q)
    assert sum(t.weights().values()) == 100
    assert all(len(r.reason) <= 120 for r in t.rows)
    assert parse_markdown(render_markdown(t), q, guru) == t
