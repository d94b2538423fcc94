"""Loading, cleaning and persisting daily price and return series."""

from __future__ import annotations

import csv
import datetime as dt
import json
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class SeriesError(ValueError):
    """Raised for malformed or degenerate series input."""


def _check_dates(dates, n):
    if dates is None:
        return None
    dates = tuple(dates)
    if len(dates) != n:
        raise SeriesError(f"{len(dates)} dates for {n} values")
    for k in range(1, n):
        if not dates[k] > dates[k - 1]:
            raise SeriesError(f"dates not strictly increasing at position {k}")
    return dates


@dataclass(frozen=True)
class PriceSeries:
    prices: np.ndarray
    dates: Optional[tuple] = None
    source_label: str = ""

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise SeriesError("a price series needs at least 2 observations")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise SeriesError("prices must be finite and positive")
        p.setflags(write=False)
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "dates", _check_dates(self.dates, p.size))

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    """Nonzero daily returns with provenance.

    ``method`` records whether the values are simple or log returns; it
    decides how :func:`stylized.stats_core.end_return` compounds them.
    ``meta`` carries free-form provenance (e.g. simulation flags).
    """

    values: np.ndarray
    dates: Optional[tuple] = None
    source_label: str = ""
    zeros_removed: int = 0
    method: str = "simple"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise SeriesError("returns must be one-dimensional")
        if v.size == 0:
            raise SeriesError("empty series")
        if v.size < 2:
            raise SeriesError("a return series needs at least 2 observations")
        if not np.all(np.isfinite(v)):
            raise SeriesError("returns must be finite")
        if np.any(v == 0):
            raise SeriesError("zero returns must be removed before constructing a ReturnSeries")
        if self.method not in ("simple", "log"):
            raise SeriesError(f"unknown return method {self.method!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dates", _check_dates(self.dates, v.size))

    def __len__(self):
        return self.values.size

    @classmethod
    def from_values(cls, values, dates=None, **kwargs) -> "ReturnSeries":
        """Build a series, dropping exact zeros and counting them."""
        v = np.asarray(values, dtype=np.float64)
        keep = v != 0
        if dates is not None:
            dates = tuple(d for d, k in zip(dates, keep) if k)
        dropped = int(v.size - keep.sum()) + kwargs.pop("zeros_removed", 0)
        return cls(v[keep], dates=dates, zeros_removed=dropped, **kwargs)


def price_returns(prices, method: str = "simple") -> tuple[np.ndarray, int]:
    """Nonzero returns of a price vector and the number of zeros dropped."""
    p = prices.prices if isinstance(prices, PriceSeries) else np.asarray(prices, dtype=np.float64)
    if method == "simple":
        r = p[1:] / p[:-1] - 1.0
    elif method == "log":
        r = np.log(p[1:] / p[:-1])
    else:
        raise SeriesError(f"unknown return method {method!r}")
    keep = r != 0
    return r[keep], int(r.size - keep.sum())


def to_returns(prices: PriceSeries, method: str = "simple") -> ReturnSeries:
    """Difference a price path into returns, removing zero returns.

    Fewer than two nonzero returns is an error, since a
    :class:`ReturnSeries` needs at least two.
    """
    if method not in ("simple", "log"):
        raise SeriesError(f"unknown return method {method!r}")
    p = prices.prices
    r = p[1:] / p[:-1] - 1.0 if method == "simple" else np.log(p[1:] / p[:-1])
    dates = prices.dates[1:] if prices.dates is not None else None
    return ReturnSeries.from_values(r, dates=dates, source_label=prices.source_label, method=method)


def stationary_embed(series: ReturnSeries, seed=None) -> ReturnSeries:
    """Rotate the series by an offset drawn uniformly from ``0..n-1``.

    This is the periodic extension of the data with a random origin.
    Dates are dropped since a rotation breaks the calendar order.
    """
    rng = np.random.default_rng(seed)
    offset = int(rng.integers(len(series)))
    return rotate(series, offset)


def rotate(series: ReturnSeries, offset: int) -> ReturnSeries:
    v = np.roll(series.values, -offset)
    return ReturnSeries(v, source_label=series.source_label, zeros_removed=series.zeros_removed,
                        method=series.method, meta={**series.meta, "rotation": int(offset)})


# -- CSV ---------------------------------------------------------------------

_PRICE_NAMES = {"price", "prices", "close", "adj_close", "adjclose", "adj close", "level", "value_price"}
_DATE_NAMES = {"date", "day", "time", "timestamp"}


def _parse_float(cell, row, col):
    try:
        x = float(cell.strip())
    except ValueError:
        raise SeriesError(f"parse error at row {row}: column {col!r} is not numeric ({cell!r})") from None
    if not np.isfinite(x):
        raise SeriesError(f"parse error at row {row}: column {col!r} is not finite ({cell!r})")
    return x


def _parse_date(cell, row):
    try:
        return dt.date.fromisoformat(cell.strip())
    except ValueError:
        raise SeriesError(f"parse error at row {row}: bad date {cell!r} (expected YYYY-MM-DD)") from None


def load_series(path, kind: Optional[str] = None, delimiter: str = ",", method: str = "simple",
                value_column: Optional[str] = None, date_column: Optional[str] = None):
    """Read a price or return CSV.

    The file must have a header row. Accepted layouts are ``date,price``,
    ``date,return`` or a single return column. ``kind`` (``"price"`` or
    ``"return"``) overrides detection from the header. Rows are numbered
    from 1 for the first data row; any unparsable row raises
    :class:`SeriesError` naming it.

    Returns a :class:`PriceSeries` or a :class:`ReturnSeries` (zeros removed).
    """
    path = os.fspath(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter)]
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise SeriesError("empty series")
    header = [h.strip().lower() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise SeriesError("empty series")

    if date_column is not None:
        date_idx = header.index(date_column.lower())
    else:
        date_idx = next((k for k, h in enumerate(header) if h in _DATE_NAMES), None)
    if value_column is not None:
        val_idx = header.index(value_column.lower())
    else:
        candidates = [k for k in range(len(header)) if k != date_idx]
        if not candidates:
            raise SeriesError("no value column in header")
        val_idx = candidates[0]
    if kind is None:
        name = header[val_idx]
        if name in _PRICE_NAMES or "price" in name or "close" in name:
            kind = "price"
        else:
            kind = "return"
    if kind not in ("price", "return"):
        raise SeriesError(f"unknown series kind {kind!r}")

    values, dates = [], []
    for row_no, row in enumerate(body, start=1):
        if len(row) <= max(val_idx, date_idx if date_idx is not None else 0):
            raise SeriesError(f"parse error at row {row_no}: expected {len(header)} columns, got {len(row)}")
        values.append(_parse_float(row[val_idx], row_no, header[val_idx]))
        if date_idx is not None:
            dates.append(_parse_date(row[date_idx], row_no))
    label = os.path.basename(path)
    d = tuple(dates) if date_idx is not None else None
    if kind == "price":
        return PriceSeries(np.array(values), dates=d, source_label=label)
    return ReturnSeries.from_values(np.array(values), dates=d, source_label=label, method=method)


def save_returns(series: ReturnSeries, path) -> None:
    """Write a return series as CSV; values use ``repr`` so reloads are exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if series.dates is not None:
            w.writerow(["date", "return"])
            for d, v in zip(series.dates, series.values):
                w.writerow([d.isoformat(), repr(float(v))])
        else:
            w.writerow(["return"])
            for v in series.values:
                w.writerow([repr(float(v))])


def save_paths(paths: Sequence[np.ndarray], path, layout: str = "wide") -> None:
    """Persist simulated paths, either one column per path or long format."""
    paths = [np.asarray(p, dtype=np.float64) for p in paths]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if layout == "wide":
            n = {p.size for p in paths}
            if len(n) != 1:
                raise SeriesError("wide layout needs paths of equal length")
            w.writerow([f"path_{k}" for k in range(len(paths))])
            for row in np.column_stack(paths):
                w.writerow([repr(float(x)) for x in row])
        elif layout == "long":
            w.writerow(["run_id", "t", "value"])
            for k, p in enumerate(paths):
                for t, x in enumerate(p, start=1):
                    w.writerow([k, t, repr(float(x))])
        else:
            raise SeriesError(f"unknown layout {layout!r}")


def load_paths(path) -> list[np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows) < 2:
        raise SeriesError("empty series")
    header = rows[0]
    if header == ["run_id", "t", "value"]:
        runs: dict[int, list[float]] = {}
        for r in rows[1:]:
            runs.setdefault(int(r[0]), []).append(float(r[2]))
        return [np.array(runs[k]) for k in sorted(runs)]
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    return [data[:, k].copy() for k in range(data.shape[1])]


def write_columns(path, columns: dict) -> None:
    """Write equal-length named columns as CSV (figure data)."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([repr(x.item()) if hasattr(x, "item") else repr(x) for x in row])


def read_columns(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise SeriesError(f"{path}: empty CSV")
    names = rows[0]
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    return {name: data[:, k] for k, name in enumerate(names)}


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
