import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from stylized import series_io
from stylized.series_io import (PriceSeries, ReturnSeries, SeriesError, load_series, price_returns, rotate,
                                stationary_embed, to_returns)


def test_simple_returns_definition():
    v, zeros = price_returns(np.array([1.0, 1.1]), "simple")
    assert v == pytest.approx([0.1])
    assert zeros == 0


def test_zero_returns_removed_and_counted():
    v, zeros = price_returns(np.array([1.0, 1.0, 2.0]))
    np.testing.assert_array_equal(v, [1.0])
    assert zeros == 1
    r = to_returns(PriceSeries(np.array([1.0, 1.0, 2.0, 4.0])), "simple")
    np.testing.assert_array_equal(r.values, [1.0, 1.0])
    assert r.zeros_removed == 1


def test_single_return_is_not_a_series():
    with pytest.raises(SeriesError):
        to_returns(PriceSeries(np.array([1.0, 1.1])))


def test_zero_count_on_long_series():
    rng = np.random.default_rng(0)
    r = rng.normal(0, 0.01, 14049)
    r[rng.choice(14049, 23, replace=False)] = 0.0
    p = np.concatenate([[100.0], 100.0 * np.cumprod(1 + r)])
    s = to_returns(PriceSeries(p))
    assert len(s) == 14026 and s.zeros_removed == 23


def test_log_returns():
    r = to_returns(PriceSeries(np.array([1.0, np.e, 1.0])), "log")
    assert r.values == pytest.approx([1.0, -1.0])
    assert r.method == "log"


def test_price_invariants():
    with pytest.raises(SeriesError):
        PriceSeries(np.array([1.0]))
    with pytest.raises(SeriesError):
        PriceSeries(np.array([1.0, 0.0]))
    with pytest.raises(SeriesError):
        PriceSeries(np.array([1.0, -2.0]))


def test_return_invariants():
    with pytest.raises(SeriesError):
        ReturnSeries(np.array([0.1, 0.0]))
    with pytest.raises(SeriesError):
        ReturnSeries(np.array([0.1, np.nan]))
    with pytest.raises(SeriesError):
        ReturnSeries(np.array([0.1]))
    d = (dt.date(2000, 1, 2), dt.date(2000, 1, 1))
    with pytest.raises(SeriesError):
        ReturnSeries(np.array([0.1, 0.2]), dates=d)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.5, 2.0).filter(lambda x: abs(x - 1.0) > 1e-9), min_size=2, max_size=60))
def test_price_reconstruction(ratios):
    p = np.concatenate([[1.0], np.cumprod(ratios)])
    r = to_returns(PriceSeries(p))
    if r.zeros_removed:
        return
    rebuilt = np.concatenate([[1.0], np.cumprod(1 + r.values)])
    np.testing.assert_allclose(rebuilt, p, rtol=1e-12)


def test_rotation_examples():
    s = ReturnSeries(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(rotate(s, 0).values, s.values)
    np.testing.assert_array_equal(rotate(s, 1).values, [2.0, 3.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1).filter(lambda v: v != 0), min_size=2, max_size=40), st.integers(0, 2**32))
def test_stationary_embed_preserves_multiset(vals, seed):
    s = ReturnSeries(np.array(vals))
    e = stationary_embed(s, seed)
    np.testing.assert_array_equal(np.sort(e.values), np.sort(s.values))


def test_stationary_embed_offsets_uniform():
    s = ReturnSeries(np.arange(1.0, 6.0))
    counts = np.zeros(5)
    ss = np.random.SeedSequence(99)
    for child in ss.spawn(100_000):
        counts[int(stationary_embed(s, child).values[0]) - 1] += 1
    assert stats.chisquare(counts).pvalue > 0.001


def test_load_returns_csv(tmp_path):
    f = tmp_path / "r.csv"
    f.write_text("date,return\n2000-01-03,0.01\n2000-01-04,0\n2000-01-05,-0.02\n")
    s = load_series(f)
    assert isinstance(s, ReturnSeries)
    np.testing.assert_array_equal(s.values, [0.01, -0.02])
    assert s.zeros_removed == 1 and s.dates[0] == dt.date(2000, 1, 3)


def test_load_price_csv(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("date;price\n2000-01-03;100\n2000-01-04;101\n", encoding="utf-8")
    s = load_series(f, delimiter=";")
    assert isinstance(s, PriceSeries)


def test_empty_file(tmp_path):
    f = tmp_path / "e.csv"
    f.write_text("")
    with pytest.raises(SeriesError, match="empty series"):
        load_series(f)
    f.write_text("return\n")
    with pytest.raises(SeriesError, match="empty series"):
        load_series(f)


def test_parse_error_names_row(tmp_path):
    rows = ["return"] + ["0.01"] * 6 + ["abc"] + ["0.02"]
    f = tmp_path / "bad.csv"
    f.write_text("\n".join(rows) + "\n")
    with pytest.raises(SeriesError, match="row 7"):
        load_series(f)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_series(tmp_path / "nope.csv")


def test_save_load_bit_identical(tmp_path):
    v = np.random.default_rng(1).standard_t(3, 1000) * 0.01
    s = ReturnSeries.from_values(v)
    series_io.save_returns(s, tmp_path / "r.csv")
    back = load_series(tmp_path / "r.csv")
    np.testing.assert_array_equal(back.values, s.values)


@pytest.mark.parametrize("layout", ["wide", "long"])
def test_paths_round_trip(tmp_path, layout):
    paths = [np.random.default_rng(k).normal(size=50) for k in range(3)]
    series_io.save_paths(paths, tmp_path / "p.csv", layout)
    back = series_io.load_paths(tmp_path / "p.csv")
    for a, b in zip(paths, back):
        np.testing.assert_array_equal(a, b)
