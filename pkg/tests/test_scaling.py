import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from guruscreen.errors import EmptyColumn
from guruscreen.scaling import ScaledColumn, invert, weighted_combine, winsorize_minmax

finite = st.floats(-1e6, 1e6, allow_nan=False)
maybe = st.one_of(st.none(), finite)


def col(vals):
    return {f"T{i:03d}": v for i, v in enumerate(vals)}


def type7(xs, q):
    """Plain order-statistic interpolation at rank (n-1)q."""
    xs = sorted(xs)
    h = (len(xs) - 1) * q
    lo = int(h)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (h - lo) * (xs[hi] - xs[lo])


def test_evenly_spaced_midpoint():
    out = winsorize_minmax(col(list(range(101))))
    assert out.p5 == 5.0 and out.p95 == 95.0
    assert out["T050"] == 0.5
    assert out["T000"] == 0.0 and out["T100"] == 1.0


def test_no_spread():
    out = winsorize_minmax(col([7.0] * 9))
    assert out.degenerate
    assert set(out.values.values()) == {0.5}


def test_na_passthrough_and_empty():
    out = winsorize_minmax(col([1.0, 2.0, None]))
    assert out["T002"] is None
    with pytest.raises(EmptyColumn):
        winsorize_minmax(col([None, None]))


@given(st.lists(finite, min_size=1, max_size=60))
def test_percentiles_match_type7(xs):
    out = winsorize_minmax(col(xs))
    assert out.p5 == pytest.approx(type7(xs, 0.05), rel=1e-12, abs=1e-9)
    assert out.p95 == pytest.approx(type7(xs, 0.95), rel=1e-12, abs=1e-9)


@given(st.lists(maybe, min_size=1, max_size=60))
def test_bounds(xs):
    assume(any(x is not None for x in xs))
    out = winsorize_minmax(col(xs))
    for k, x in col(xs).items():
        v = out[k]
        assert (v is None) == (x is None)
        if v is not None:
            assert 0.0 <= v <= 1.0


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60), st.floats(0.1, 10), st.floats(-100, 100))
def test_affine_invariance(xs, a, b):
    # keep the spread well above the rounding noise of a*x + b
    assume(max(xs) - min(xs) > 1e-2)
    base = winsorize_minmax(col(xs))
    moved = winsorize_minmax(col([a * x + b for x in xs]))
    if base.degenerate:
        assert moved.degenerate
        return
    for k in base.values:
        assert abs(base[k] - moved[k]) <= 1e-12


def test_invert():
    c = ScaledColumn({"a": 0.0, "b": 0.5, "c": None})
    assert invert(c).values == {"a": 1.0, "b": 0.5, "c": None}


def test_weighted_combine_examples():
    assert weighted_combine([({"a": 1.0}, 0.5), ({"a": 0.0}, 0.5)]) == {"a": 0.5}
    assert weighted_combine([({"a": None}, 0.25), ({"a": 0.8}, 0.75)])["a"] == pytest.approx(0.8)
    assert weighted_combine([({"a": None}, 0.25), ({"a": None}, 0.75)]) == {"a": None}
    with pytest.raises(ValueError):
        weighted_combine([({"a": 1.0}, 0.0)])


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.01, 1)), min_size=1, max_size=8))
def test_weighted_combine_no_na_is_plain_sum(pairs):
    out = weighted_combine([({"a": x}, w) for x, w in pairs])["a"]
    assert out == pytest.approx(sum(x * w for x, w in pairs), rel=1e-12, abs=1e-15)


@given(st.lists(st.tuples(st.one_of(st.none(), st.floats(0, 1)), st.floats(0.01, 1)), min_size=1, max_size=8))
def test_weighted_combine_effective_weights(pairs):
    out = weighted_combine([({"a": x}, w) for x, w in pairs])["a"]
    avail = [(x, w) for x, w in pairs if x is not None]
    if not avail:
        assert out is None
        return
    scale = sum(w for _, w in pairs) / sum(w for _, w in avail)
    assert out == pytest.approx(sum(x * w * scale for x, w in avail), rel=1e-12, abs=1e-15)
