"""Forecast averaging with four weighting schemes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evaluation import mape, rmse

SCHEMES = ("simple_mean", "least_squares", "inverse_mse", "mse_ranks")


@dataclass
class CombinationResult:
    scheme: str
    names: list
    weights: np.ndarray
    combined: np.ndarray
    fit_window: tuple
    intercept: float = 0.0
    flags: list = field(default_factory=list)
    condition: float = float("nan")

    def weight_map(self) -> dict:
        return dict(zip(self.names, self.weights.tolist()))


def _stack(forecasts):
    if isinstance(forecasts, dict):
        names = list(forecasts)
        F = np.column_stack([np.asarray(forecasts[k], dtype=np.float64) for k in names])
    else:
        F = np.asarray(forecasts, dtype=np.float64)
        if F.ndim == 1:
            F = F[:, None]
        names = [f"f{i + 1}" for i in range(F.shape[1])]
    if F.ndim != 2 or F.shape[0] == 0:
        raise ValueError("forecasts must be aligned 1-d series")
    return names, F


def _window(n, fit_window):
    if fit_window is None:
        return (0, n)
    start, stop = fit_window
    start, stop = int(start), int(n if stop is None else stop)
    if not 0 <= start < stop <= n:
        raise ValueError(f"fit window {fit_window} outside 0..{n}")
    return (start, stop)


def _actual(actual, n):
    y = np.asarray(actual, dtype=np.float64)
    if y.shape != (n,):
        raise ValueError(f"actual has shape {y.shape}, forecasts have {n} rows")
    return y


def _fit_mse(F, y, win):
    s, e = win
    return np.mean((F[s:e] - y[s:e, None]) ** 2, axis=0)


def combine_simple_mean(forecasts) -> CombinationResult:
    names, F = _stack(forecasts)
    k = F.shape[1]
    w = np.full(k, 1.0 / k)
    return CombinationResult("simple_mean", names, w, F.mean(axis=1), (0, F.shape[0]))


def combine_least_squares(forecasts, actual, fit_window=None) -> CombinationResult:
    """Regress actual on an intercept and the forecasts over ``fit_window``.

    Collinear forecasts do not raise: the minimum-norm solution is used and
    the result is flagged ``singular`` with the design's condition number.
    The returned coefficients never have a larger in-sample SSR than putting
    all weight on the single best forecast.
    """
    names, F = _stack(forecasts)
    n, k = F.shape
    y = _actual(actual, n)
    win = _window(n, fit_window)
    s, e = win
    X = np.column_stack([np.ones(e - s), F[s:e]])
    if e - s <= k + 1:
        raise ValueError(f"fit window of {e - s} rows is too short for {k} forecasts")
    coef, _, rank, sv = np.linalg.lstsq(X, y[s:e], rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    flags = []
    if rank < X.shape[1]:
        flags.append("singular")

    def ssr(c):
        r = y[s:e] - X @ c
        return float(r @ r)

    # guard the projection property against rounding in the solver
    best = ssr(coef)
    for i in range(k):
        unit = np.zeros(k + 1)
        unit[i + 1] = 1.0
        if ssr(unit) < best:
            coef, best = unit, ssr(unit)
            flags.append("solver_polished")
    combined = coef[0] + F @ coef[1:]
    return CombinationResult("least_squares", names, coef[1:].copy(), combined, win,
                             intercept=float(coef[0]), flags=flags, condition=cond)


def combine_inverse_mse(forecasts, actual, fit_window=None) -> CombinationResult:
    """Weights proportional to ``1 / MSE`` over ``fit_window``.

    A forecast with zero MSE takes all the weight (the first one, if several)
    and the result is flagged ``degenerate``.
    """
    names, F = _stack(forecasts)
    y = _actual(actual, F.shape[0])
    win = _window(F.shape[0], fit_window)
    mse = _fit_mse(F, y, win)
    flags = []
    if np.any(mse == 0):
        w = np.zeros(len(mse))
        w[int(np.flatnonzero(mse == 0)[0])] = 1.0
        flags.append("degenerate")
    else:
        inv = 1.0 / mse
        w = inv / inv.sum()
    return CombinationResult("inverse_mse", names, w, F @ w, win, flags=flags)


def mse_ranks(mse) -> np.ndarray:
    """Rank 1 = smallest MSE; ties go to the earlier forecast."""
    order = np.argsort(np.asarray(mse), kind="stable")
    ranks = np.empty(len(order), dtype=int)
    ranks[order] = np.arange(1, len(order) + 1)
    return ranks


def combine_mse_ranks(forecasts, actual, fit_window=None, rule: str = "inverse") -> CombinationResult:
    """Rank-based weights.

    ``rule="inverse"`` weights each forecast by ``1/rank`` (normalised);
    ``rule="proportional"`` uses ``rank / sum(ranks)``, which favours the
    worse forecast and is kept only for comparison.
    """
    names, F = _stack(forecasts)
    y = _actual(actual, F.shape[0])
    win = _window(F.shape[0], fit_window)
    ranks = mse_ranks(_fit_mse(F, y, win)).astype(float)
    if rule == "inverse":
        raw = 1.0 / ranks
    elif rule == "proportional":
        raw = ranks
    else:
        raise ValueError(f"unknown rank rule {rule!r}")
    w = raw / raw.sum()
    return CombinationResult("mse_ranks", names, w, F @ w, win)


def combine(scheme: str, forecasts, actual=None, fit_window=None, **kw) -> CombinationResult:
    if scheme == "simple_mean":
        return combine_simple_mean(forecasts)
    if scheme == "least_squares":
        return combine_least_squares(forecasts, actual, fit_window)
    if scheme == "inverse_mse":
        return combine_inverse_mse(forecasts, actual, fit_window)
    if scheme == "mse_ranks":
        return combine_mse_ranks(forecasts, actual, fit_window, **kw)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")


@dataclass
class ReportRow:
    name: str
    kind: str
    rmse: float
    mape: float
    best_rmse: bool = False
    best_mape: bool = False
    weights: dict = field(default_factory=dict)
    intercept: float = 0.0
    flags: list = field(default_factory=list)


def evaluate_combinations(forecasts: dict, actual, fit_window=None, eval_window=None,
                          schemes=SCHEMES, rank_rule: str = "inverse") -> list[ReportRow]:
    """RMSE/MAPE of each individual forecast and each combination scheme.

    Weights are estimated on ``fit_window`` and scored on ``eval_window``
    (both default to the full range). Best RMSE and best MAPE are marked.
    """
    names, F = _stack(forecasts)
    n = F.shape[0]
    y = _actual(actual, n)
    ev = _window(n, eval_window)
    es, ee = ev
    rows = [ReportRow(name, "individual", rmse(y[es:ee], F[es:ee, i]), mape(y[es:ee], F[es:ee, i]))
            for i, name in enumerate(names)]
    fdict = dict(zip(names, F.T))
    for scheme in schemes:
        if len(names) == 1:
            res = CombinationResult(scheme, names, np.ones(1), F[:, 0].copy(),
                                    _window(n, fit_window), flags=["degenerate"])
        elif scheme == "mse_ranks":
            res = combine_mse_ranks(fdict, y, fit_window, rule=rank_rule)
        else:
            res = combine(scheme, fdict, y, fit_window)
        rows.append(ReportRow(
            scheme, "combination", rmse(y[es:ee], res.combined[es:ee]),
            mape(y[es:ee], res.combined[es:ee]), weights=res.weight_map(),
            intercept=res.intercept, flags=list(res.flags),
        ))
    best_r = min(range(len(rows)), key=lambda i: rows[i].rmse)
    best_m = min(range(len(rows)), key=lambda i: rows[i].mape)
    rows[best_r].best_rmse = True
    rows[best_m].best_mape = True
    return rows
