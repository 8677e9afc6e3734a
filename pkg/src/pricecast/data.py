"""Price series ingestion, chronological splitting, scaling and windowing."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed input files or invalid series operations."""


def _parse_month(text: str) -> tuple[int, int]:
    parts = text.strip().split("-")
    if len(parts) != 2 or len(parts[0]) != 4 or len(parts[1]) != 2:
        raise ValueError(text)
    year, month = int(parts[0]), int(parts[1])
    if not 1 <= month <= 12:
        raise ValueError(text)
    return year, month


def _month_index(stamp: str) -> int:
    year, month = _parse_month(stamp)
    return year * 12 + (month - 1)


def _month_stamp(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


@dataclass(frozen=True)
class PriceSeries:
    """A monthly price sequence with consecutive ``YYYY-MM`` stamps.

    Loaded series have at least 2 points; the pieces produced by
    :func:`train_test_split` may be shorter.
    """

    name: str
    dates: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        if values.ndim != 1 or len(values) != len(self.dates):
            raise DataError("dates and values must be 1-d and the same length")
        if len(values) < 1:
            raise DataError("a price series needs at least 1 point")
        if not np.all(np.isfinite(values)):
            raise DataError("price values must be finite")
        idx = [_month_index(d) for d in self.dates]
        for k in range(1, len(idx)):
            if idx[k] != idx[k - 1] + 1:
                raise DataError(
                    f"dates must be consecutive months: {self.dates[k - 1]} -> {self.dates[k]}"
                )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def start(self) -> str:
        return self.dates[0]

    @property
    def end(self) -> str:
        return self.dates[-1]


def load_series(path, column: str) -> PriceSeries:
    """Read one named column of a monthly price CSV.

    The file must have a header whose first column is ``date`` (``YYYY-MM``).
    Rows are sorted by date; a missing month or a non-numeric cell raises
    :class:`DataError` naming the offending row (1-based, header is row 1).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if not header or header[0].lower() != "date":
            raise DataError(f"{path}: first column must be 'date'")
        if column not in header[1:]:
            raise DataError(
                f"{path}: no column {column!r}; available: {', '.join(header[1:])}"
            )
        col = header.index(column)
        rows = []
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                month = _month_index(row[0])
            except (ValueError, IndexError):
                raise DataError(f"{path}: row {rownum}: unparseable date {row[0]!r}") from None
            try:
                value = float(row[col])
            except (ValueError, IndexError):
                cell = row[col] if col < len(row) else ""
                raise DataError(f"{path}: row {rownum}: non-numeric value {cell!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}: row {rownum}: non-finite value {row[col]!r}")
            rows.append((month, value, rownum))
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows")
    rows.sort()
    for (prev, _, _), (cur, _, rownum) in zip(rows, rows[1:]):
        if cur == prev:
            raise DataError(f"{path}: row {rownum}: duplicate month {_month_stamp(cur)}")
        if cur != prev + 1:
            raise DataError(
                f"{path}: row {rownum}: gap in months, missing {_month_stamp(prev + 1)}"
            )
    return PriceSeries(
        name=column,
        dates=[_month_stamp(m) for m, _, _ in rows],
        values=np.array([v for _, v, _ in rows]),
    )


def bundled_path(commodity: str) -> Path:
    """Path of a bundled CSV (``cotton`` or ``oil``)."""
    ref = resources.files("pricecast") / "datasets" / f"{commodity}.csv"
    return Path(str(ref))


def train_test_split(series: PriceSeries, train_ratio: float = 0.7):
    """Chronological split; the first ``floor(ratio * m)`` points train."""
    if not 0.0 < train_ratio < 1.0:
        raise DataError(f"train_ratio must lie in (0, 1), got {train_ratio}")
    m = len(series)
    cut = int(math.floor(train_ratio * m))
    if cut < 1 or m - cut < 1:
        raise DataError(f"ratio {train_ratio} leaves an empty part for {m} points")
    train = PriceSeries(series.name, series.dates[:cut], series.values[:cut])
    test = PriceSeries(series.name, series.dates[cut:], series.values[cut:])
    return train, test


@dataclass(frozen=True)
class MinMaxScaler:
    """Affine map of the fit sample onto [0, 1].

    Values outside the fit range map outside [0, 1]; that is expected for
    test data and is not clipped.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.hi <= self.lo:
            raise DataError(f"scaler needs hi > lo, got lo={self.lo}, hi={self.hi}")

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.lo) / self.span

    def invert(self, z) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * self.span + self.lo


def fit_scaler(train) -> MinMaxScaler:
    values = np.asarray(getattr(train, "values", train), dtype=np.float64)
    if values.size < 2:
        raise DataError("scaler fit sample needs at least 2 values")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DataError("cannot scale a constant series")
    return MinMaxScaler(lo, hi)


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised (window, next value) pairs from a sliding window.

    ``features[i] == scaled[i:i + lookback]`` and ``labels[i] == scaled[i + lookback]``.
    """

    features: np.ndarray
    labels: np.ndarray
    lookback: int
    stride: int = 1

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def shape(self) -> tuple[int, int, int]:
        """Recurrent-input shape ``(m - lookback, stride, lookback)``."""
        return (len(self.labels), self.stride, self.lookback)

    def as_3d(self) -> np.ndarray:
        return self.features.reshape(self.shape)


def make_windows(scaled, lookback: int, stride: int = 1) -> WindowedDataset:
    """Slide a width-``lookback`` window one step at a time over ``scaled``."""
    x = np.asarray(scaled, dtype=np.float64)
    if x.ndim != 1:
        raise DataError("make_windows expects a 1-d vector")
    if int(lookback) != lookback or lookback < 1:
        raise DataError(f"lookback must be a positive integer, got {lookback}")
    if stride != 1:
        raise DataError("only stride 1 is supported")
    m = len(x)
    if m <= lookback:
        raise DataError(f"{m} points cannot form a window of {lookback} plus a label")
    lookback = int(lookback)
    features = np.lib.stride_tricks.sliding_window_view(x, lookback)[: m - lookback].copy()
    labels = x[lookback:].copy()
    features.setflags(write=False)
    labels.setflags(write=False)
    return WindowedDataset(features, labels, lookback, stride)
