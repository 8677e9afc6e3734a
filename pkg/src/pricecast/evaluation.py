"""Forecast accuracy: RMSE, MAPE and the Harvey-Leybourne-Newbold test."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


def _pair(actual, predicted):
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValueError("need at least one observation")
    return a, p


def rmse(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent, relative to ``actual``."""
    a, p = _pair(actual, predicted)
    if np.any(a == 0):
        raise ValueError("MAPE is undefined when an actual value is zero")
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


@dataclass
class HlnResult:
    statistic: float
    p_value: float
    n: int
    h: int
    mean_loss_diff: float
    degenerate: bool = False
    notes: list = field(default_factory=list)


def hln_test(errors_a, errors_b, h: int = 1) -> HlnResult:
    """Small-sample corrected Diebold-Mariano test under squared-error loss.

    The loss differential is ``e_a**2 - e_b**2``; a negative statistic means
    forecast ``a`` is more accurate. Its long-run variance uses the first
    ``h - 1`` autocovariances with rectangular weights. The p-value is
    two-sided from Student-t with ``n - 1`` degrees of freedom.
    """
    ea = np.asarray(errors_a, dtype=np.float64)
    eb = np.asarray(errors_b, dtype=np.float64)
    if ea.shape != eb.shape or ea.ndim != 1:
        raise ValueError("error series must be 1-d and the same length")
    n = len(ea)
    if n < 10:
        raise ValueError("HLN test needs at least 10 observations")
    if h < 1:
        raise ValueError("horizon must be at least 1")
    d = ea ** 2 - eb ** 2
    dbar = float(d.mean())
    dc = d - dbar
    gamma = [float(dc @ dc) / n]
    for k in range(1, h):
        gamma.append(float(dc[k:] @ dc[:-k]) / n)
    var = gamma[0] + 2.0 * sum(gamma[1:])
    notes = []
    if var <= 0 and h > 1:
        notes.append("non-positive long-run variance; fell back to lag-0 variance")
        var = gamma[0]
    scale = max(float(np.mean(ea ** 2 + eb ** 2)), np.finfo(float).tiny)
    if var <= (1e-14 * scale) ** 2:
        return HlnResult(0.0, 1.0, n, h, dbar, degenerate=True,
                         notes=notes + ["loss differential has zero variance"])
    dm = dbar / math.sqrt(var / n)
    correction = math.sqrt((n + 1 - 2 * h + h * (h - 1) / n) / n)
    stat = dm * correction
    p = float(2.0 * stats.t.sf(abs(stat), df=n - 1))
    return HlnResult(stat, min(1.0, p), n, h, dbar, notes=notes)


@dataclass
class ForecastSet:
    """Actual values and named forecasts on a shared date index."""

    dates: tuple
    actual: np.ndarray
    forecasts: dict

    def __post_init__(self):
        self.dates = tuple(self.dates)
        self.actual = np.asarray(self.actual, dtype=np.float64)
        if not self.forecasts:
            raise ValueError("a forecast set needs at least one forecast")
        n = len(self.dates)
        if self.actual.shape != (n,):
            raise ValueError("actual values do not match the dates")
        clean = {}
        for name, f in self.forecasts.items():
            f = np.asarray(f, dtype=np.float64)
            if f.shape != (n,):
                raise ValueError(f"forecast {name!r} has length {f.shape}, expected {n}")
            clean[name] = f
        for arr in (self.actual, *clean.values()):
            if not np.all(np.isfinite(arr)):
                raise ValueError("forecast set values must be finite")
        self.forecasts = clean

    @classmethod
    def align(cls, actual_by_date: dict, forecasts_by_date: dict) -> "ForecastSet":
        """Inner-join several ``{date: value}`` maps on their common dates."""
        common = set(actual_by_date)
        for series in forecasts_by_date.values():
            common &= set(series)
        dates = sorted(common)
        return cls(
            dates, [actual_by_date[d] for d in dates],
            {k: [v[d] for d in dates] for k, v in forecasts_by_date.items()},
        )

    def errors(self, name: str) -> np.ndarray:
        return self.actual - self.forecasts[name]

    def metrics(self) -> dict:
        return {name: {"rmse": rmse(self.actual, f), "mape": mape(self.actual, f)}
                for name, f in self.forecasts.items()}

    def hln_matrix(self, h: int = 1) -> list[tuple[str, str, HlnResult]]:
        names = list(self.forecasts)
        return [(a, b, hln_test(self.errors(a), self.errors(b), h))
                for i, a in enumerate(names) for b in names[i + 1:]]
