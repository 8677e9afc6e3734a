"""Breakpoint Dickey-Fuller unit-root test with an endogenous break date.

For every candidate break date ``T_b`` the regression

    dP_t = mu + beta*t + theta*DU_t + gamma*DT_t + omega*D_t
           + (alpha - 1) P_{t-1} + sum_i tau_i dP_{t-i} + u_t

is estimated (the levels form with ``alpha`` on ``P_{t-1}`` is the same fit)
and the t-statistic of ``alpha - 1`` is recorded; the test statistic is its
minimum over dates. Critical values come from simulating the same search on
driftless random walks.

Variants restrict the deterministic terms:

==================  =========================  ======================
variant             regressors                 restriction
==================  =========================  ======================
``intercept_only``  1, DU, D                   beta = gamma = 0
``intercept_break`` 1, t, DU, D                gamma = 0
``trend_break``     1, t, DT                   theta = omega = 0
``both_breaks``     1, t, DU, DT, D            none
==================  =========================  ======================
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .io import write_text_atomic
from .parallel import parallel_map

VARIANTS = {
    "intercept_only": (("const",), ("DU", "D")),
    "intercept_break": (("const", "trend"), ("DU", "D")),
    "trend_break": (("const", "trend"), ("DT",)),
    "both_breaks": (("const", "trend"), ("DU", "DT", "D")),
}
LAG_RULES = ("sic", "t_sig")
T_SIG_CRIT = 1.645


class UnitRootError(RuntimeError):
    pass


def default_lag_max(n: int) -> int:
    """Schwert's rule ``floor(12 (n/100)^(1/4))``."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


@dataclass(frozen=True)
class BreakSpec:
    variant: str = "both_breaks"
    trimming: float = 0.15
    lag_max: int | None = None
    lag_rule: str = "sic"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {', '.join(VARIANTS)}")
        if not 0.0 <= self.trimming < 0.5:
            raise ValueError("trimming must lie in [0, 0.5)")
        if self.lag_max is not None and self.lag_max < 0:
            raise ValueError("lag_max must be nonnegative")
        if self.lag_rule not in LAG_RULES:
            raise ValueError(f"lag_rule must be one of {LAG_RULES}")

    def resolved_lag_max(self, n: int) -> int:
        return default_lag_max(n) if self.lag_max is None else self.lag_max


# ---------------------------------------------------------------- single regression

def break_dummies(n: int, break_date: int) -> dict[str, np.ndarray]:
    """``DU``, ``DT`` and ``D`` over ``t = 1..n`` for a 1-based break date."""
    t = np.arange(1, n + 1)
    after = t >= break_date
    return {
        "DU": after.astype(float),
        "DT": np.where(after, t - break_date + 1, 0).astype(float),
        "D": (t == break_date).astype(float),
    }


@dataclass
class AdfFit:
    alpha_hat: float
    t_alpha: float
    coef: dict
    ssr: float
    nobs: int
    k: int
    sic: float


def adf_regression(series, break_date: int, spec: BreakSpec | str, p: int,
                   start: int | None = None) -> AdfFit:
    """Least-squares fit of the break regression at one break date.

    ``break_date`` is a 0-based index into ``series``. Observations
    ``t = start..n-1`` are used (default ``start = p + 1``, the first with all
    lags available). Returns ``alpha_hat`` (levels coefficient on ``P_{t-1}``)
    and the t-statistic for ``alpha = 1``.
    """
    if isinstance(spec, str):
        spec = BreakSpec(variant=spec)
    y = np.asarray(getattr(series, "values", series), dtype=np.float64)
    n = len(y)
    start = p + 1 if start is None else start
    if start < p + 1:
        raise ValueError("start must leave room for p lagged differences")
    det, dums = VARIANTS[spec.variant]
    dy = np.diff(y, prepend=np.nan)
    rows = np.arange(start, n)
    cols = {}
    if "const" in det:
        cols["const"] = np.ones(len(rows))
    if "trend" in det:
        cols["trend"] = rows + 1.0
    dd = break_dummies(n, break_date + 1)
    for name in dums:
        cols[name] = dd[name][rows]
    cols["P_lag"] = y[rows - 1]
    for i in range(1, p + 1):
        cols[f"dP_lag{i}"] = dy[rows - i]
    X = np.column_stack(list(cols.values()))
    target = dy[rows]
    nobs, k = X.shape
    if nobs - k <= 10:
        raise UnitRootError(f"only {nobs} observations for {k} regressors")
    if np.linalg.matrix_rank(X) < k:
        raise UnitRootError(f"singular design at break index {break_date}")
    coef, *_ = np.linalg.lstsq(X, target, rcond=None)
    resid = target - X @ coef
    ssr = float(resid @ resid)
    s2 = ssr / (nobs - k)
    xtx_inv = np.linalg.inv(X.T @ X)
    j = list(cols).index("P_lag")
    se = math.sqrt(s2 * xtx_inv[j, j])
    names = list(cols)
    return AdfFit(
        alpha_hat=1.0 + coef[j], t_alpha=coef[j] / se,
        coef=dict(zip(names, coef)), ssr=ssr, nobs=nobs, k=k,
        sic=nobs * math.log(ssr / nobs) + k * math.log(nobs),
    )


# ---------------------------------------------------------------- vectorised scan

def candidate_dates(n: int, trimming: float, lag_max: int) -> np.ndarray:
    """0-based break indices searched for a series of length ``n``."""
    first_obs = lag_max + 1
    lo = max(int(math.floor(trimming * n)), first_obs + 2)
    hi = min(n - 1 - int(math.floor(trimming * n)), n - 3)
    if hi < lo:
        raise UnitRootError(f"no admissible break dates for n={n}, trimming={trimming}")
    return np.arange(lo, hi + 1)


def _rev_cumsum(a):
    return np.flip(np.cumsum(np.flip(a, axis=0), axis=0), axis=0)


class _Scanner:
    """Per-lag OLS statistics for every break date at once.

    Deterministic terms and lagged differences are projected out with a QR
    factorisation; the break dummies' projections come from reverse cumulative
    sums, so each lag costs O(n * k) instead of one regression per date.
    """

    def __init__(self, y, variant, dates, lag_max):
        self.det, self.dums = VARIANTS[variant]
        n = len(y)
        s = lag_max + 1
        rows = np.arange(s, n)
        self.N = len(rows)
        dy = np.diff(y, prepend=np.nan)
        self.target = dy[rows]
        self.plag = y[rows - 1]
        self.lags = np.column_stack([dy[rows - i] for i in range(1, lag_max + 1)]) \
            if lag_max else np.zeros((self.N, 0))
        det_cols = []
        if "const" in self.det:
            det_cols.append(np.ones(self.N))
        if "trend" in self.det:
            det_cols.append(rows + 1.0)
        self.detm = np.column_stack(det_cols)
        # positions of candidate dates inside the regression sample
        self.pos = dates - s
        self.L = self.N - self.pos  # observations at or after the break

    def _dummy_cross(self, M):
        """Rows ``B_T' M`` for each date, stacked as (n_dates, n_dummies, cols)."""
        r1 = _rev_cumsum(M)
        out = []
        for name in self.dums:
            if name == "DU":
                out.append(r1[self.pos])
            elif name == "DT":
                out.append(_rev_cumsum(r1)[self.pos])
            else:
                out.append(M[self.pos])
        return np.stack(out, axis=1)

    def _dummy_gram(self):
        L = self.L.astype(float)
        vals = {
            ("DU", "DU"): L, ("DT", "DT"): L * (L + 1) * (2 * L + 1) / 6.0,
            ("D", "D"): np.ones_like(L), ("DU", "DT"): L * (L + 1) / 2.0,
            ("DU", "D"): np.ones_like(L), ("DT", "D"): np.ones_like(L),
        }
        nb = len(self.dums)
        G = np.empty((len(L), nb, nb))
        for i, a in enumerate(self.dums):
            for j, b in enumerate(self.dums):
                G[:, i, j] = vals.get((a, b), vals.get((b, a)))
        return G

    def fit(self, p, extra_key_lag=False):
        """OLS at every date with ``p`` lags.

        Returns ``(coef_key, t_key, ssr, dof)`` where the key block is
        ``[P_{t-1}]`` or, with ``extra_key_lag``, ``[P_{t-1}, dP_{t-p}]``.
        """
        W_lags = self.lags[:, :p - 1] if extra_key_lag else self.lags[:, :p]
        W = np.column_stack([self.detm, W_lags])
        K = self.plag[:, None]
        if extra_key_lag:
            K = np.column_stack([K, self.lags[:, p - 1]])
        Q, _ = np.linalg.qr(W)
        Ky = np.column_stack([K, self.target])
        QtKy = Q.T @ Ky
        # residualised key regressors and target: inner products
        KyKy = Ky.T @ Ky - QtKy.T @ QtKy
        P = self._dummy_cross(Q)  # (nT, nb, kw)
        BKy = self._dummy_cross(Ky) - P @ QtKy  # (nT, nb, kk+1)
        BB = self._dummy_gram() - P @ np.swapaxes(P, 1, 2)
        kk = K.shape[1]
        nT, nb = BB.shape[0], BB.shape[1]
        G = np.empty((nT, kk + nb, kk + nb))
        G[:, :kk, :kk] = KyKy[:kk, :kk]
        G[:, :kk, kk:] = np.swapaxes(BKy[:, :, :kk], 1, 2)
        G[:, kk:, :kk] = BKy[:, :, :kk]
        G[:, kk:, kk:] = BB
        rhs = np.concatenate(
            [np.broadcast_to(KyKy[:kk, kk], (nT, kk)), BKy[:, :, kk]], axis=1
        )
        Ginv = np.linalg.inv(G)
        coef = np.einsum("tij,tj->ti", Ginv, rhs)
        ssr = KyKy[kk, kk] - np.einsum("ti,ti->t", coef, rhs)
        dof = self.N - W.shape[1] - kk - nb
        s2 = ssr / dof
        se = np.sqrt(s2[:, None] * np.diagonal(Ginv, axis1=1, axis2=2)[:, :kk])
        return coef[:, :kk], coef[:, :kk] / se, ssr, dof + kk + nb + W.shape[1]


@dataclass
class ScanResult:
    min_t: float
    break_index: int
    alpha_hat: float
    chosen_lag: int
    dates: np.ndarray
    per_date_t: np.ndarray
    per_date_lag: np.ndarray


def scan(series, spec: BreakSpec) -> ScanResult:
    """Minimum-t search over all candidate break dates (no p-value)."""
    y = np.asarray(getattr(series, "values", series), dtype=np.float64)
    n = len(y)
    lag_max = spec.resolved_lag_max(n)
    dates = candidate_dates(n, spec.trimming, lag_max)
    sc = _Scanner(y, spec.variant, dates, lag_max)
    nT = len(dates)
    n_det = sc.detm.shape[1]
    n_dum = len(sc.dums)
    if sc.N - (n_det + n_dum + 1 + lag_max) <= 10:
        raise UnitRootError(f"series of length {n} is too short for lag_max={lag_max}")
    best_t = np.full(nT, np.nan)
    best_a = np.full(nT, np.nan)
    best_lag = np.full(nT, -1)
    with np.errstate(invalid="ignore", divide="ignore"):
        if spec.lag_rule == "sic":
            best_crit = np.full(nT, np.inf)
            for p in range(lag_max + 1):
                coef, tstat, ssr, _ = sc.fit(p)
                k = n_det + n_dum + 1 + p
                crit = sc.N * np.log(ssr / sc.N) + k * math.log(sc.N)
                better = crit < best_crit
                best_crit = np.where(better, crit, best_crit)
                best_t = np.where(better, tstat[:, 0], best_t)
                best_a = np.where(better, coef[:, 0], best_a)
                best_lag = np.where(better, p, best_lag)
        else:
            settled = np.zeros(nT, dtype=bool)
            for p in range(lag_max, 0, -1):
                coef, tstat, _, _ = sc.fit(p, extra_key_lag=True)
                take = ~settled & (np.abs(tstat[:, 1]) > T_SIG_CRIT)
                best_t = np.where(take, tstat[:, 0], best_t)
                best_a = np.where(take, coef[:, 0], best_a)
                best_lag = np.where(take, p, best_lag)
                settled |= take
            coef, tstat, _, _ = sc.fit(0)
            take = ~settled
            best_t = np.where(take, tstat[:, 0], best_t)
            best_a = np.where(take, coef[:, 0], best_a)
            best_lag = np.where(take, 0, best_lag)
    valid = np.isfinite(best_t)
    if not valid.any():
        raise UnitRootError("the regression failed at every candidate break date")
    i = int(np.nanargmin(np.where(valid, best_t, np.inf)))
    return ScanResult(
        min_t=float(best_t[i]), break_index=int(dates[i]), alpha_hat=1.0 + float(best_a[i]),
        chosen_lag=int(best_lag[i]), dates=dates, per_date_t=best_t, per_date_lag=best_lag,
    )


# ---------------------------------------------------------------- null distribution

@dataclass
class NullDistribution:
    spec: BreakSpec
    n: int
    reps: int
    seed: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self._sorted = np.sort(self.values)

    def p_value(self, observed: float) -> float:
        """Share of simulated statistics at or below ``observed``."""
        return float(np.searchsorted(self._sorted, observed, side="right")) / len(self._sorted)

    def quantile(self, q: float) -> float:
        return float(np.quantile(self._sorted, q))

    def key(self) -> dict:
        return null_key(self.spec, self.n, self.reps, self.seed)


def null_key(spec: BreakSpec, n: int, reps: int, seed: int) -> dict:
    return {
        "variant": spec.variant, "n": n, "trimming": spec.trimming,
        "lag_max": spec.resolved_lag_max(n), "lag_rule": spec.lag_rule,
        "reps": reps, "seed": seed,
    }


def cache_name(key: dict) -> str:
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]
    return f"null_{key['variant']}_{digest}.csv"


def _one_rep(args):
    spec, n, seed, i = args
    rng = rngmod.stream(seed, rngmod.SIMULATE, i)
    walk = np.cumsum(rng.standard_normal(n))
    try:
        return scan(walk, spec).min_t
    except UnitRootError:
        return math.nan


def simulate_null(spec: BreakSpec, n: int, reps: int = 5000, seed: int = rngmod.DEFAULT_SEED,
                  n_jobs: int = 1, cache_dir=None) -> NullDistribution:
    """Min-t statistics of ``reps`` driftless Gaussian random walks of length ``n``.

    Replication ``i`` draws from its own stream ``(seed, "simulate", i)``, so
    the result does not depend on ``n_jobs``. With ``cache_dir`` the values
    are read from / written to a CSV whose name hashes every input.
    """
    if reps < 100:
        raise ValueError("reps must be at least 100")
    key = null_key(spec, n, reps, seed)
    path = Path(cache_dir) / cache_name(key) if cache_dir is not None else None
    if path is not None and path.is_file():
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        values = np.array([float(r["min_t"]) for r in rows])
        meta = path.with_suffix(".json")
        if meta.is_file() and json.loads(meta.read_text(encoding="utf-8")) == key:
            return NullDistribution(spec, n, reps, seed, values)
    values = np.array(parallel_map(_one_rep, [(spec, n, seed, i) for i in range(reps)],
                                   n_jobs, chunksize=max(1, reps // (8 * max(n_jobs, 1)))))
    values = values[np.isfinite(values)]
    dist = NullDistribution(spec, n, reps, seed, values)
    if path is not None:
        lines = ["rep,min_t"] + [f"{i},{v!r}" for i, v in enumerate(values.tolist())]
        write_text_atomic(path, "\n".join(lines) + "\n")
        write_text_atomic(path.with_suffix(".json"), json.dumps(key, indent=1, sort_keys=True) + "\n")
    return dist


# ---------------------------------------------------------------- public test

@dataclass
class BreakAdfResult:
    min_t: float
    break_index: int
    break_date: str | None
    alpha_hat: float
    chosen_lag: int
    p_value: float
    per_date_t: np.ndarray = field(repr=False)
    dates: np.ndarray = field(repr=False)
    spec: BreakSpec = field(default_factory=BreakSpec)
    reps: int = 0
    seed: int = rngmod.DEFAULT_SEED

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value <= level

    def to_row(self) -> dict:
        return {
            "variant": self.spec.variant, "trimming": self.spec.trimming,
            "lag_rule": self.spec.lag_rule,
            "break_date": self.break_date if self.break_date is not None else self.break_index,
            "min_t": self.min_t, "lag": self.chosen_lag, "alpha_hat": self.alpha_hat,
            "p_value": self.p_value, "reps": self.reps, "seed": self.seed,
        }


def breakpoint_adf(series, spec: BreakSpec | None = None, reps: int = 5000,
                   seed: int = rngmod.DEFAULT_SEED, null: NullDistribution | None = None,
                   n_jobs: int = 1, cache_dir=None) -> BreakAdfResult:
    """Run the min-t break search on ``series`` and attach a Monte Carlo p-value.

    A precomputed ``null`` (same spec and length) skips the simulation.
    """
    spec = spec or BreakSpec()
    y = np.asarray(getattr(series, "values", series), dtype=np.float64)
    res = scan(y, spec)
    if null is None:
        null = simulate_null(spec, len(y), reps, seed, n_jobs=n_jobs, cache_dir=cache_dir)
    elif null.n != len(y) or null.spec != spec:
        raise ValueError("null distribution was simulated for a different spec or length")
    dates = getattr(series, "dates", None)
    return BreakAdfResult(
        min_t=res.min_t, break_index=res.break_index,
        break_date=dates[res.break_index] if dates is not None else None,
        alpha_hat=res.alpha_hat, chosen_lag=res.chosen_lag,
        p_value=null.p_value(res.min_t), per_date_t=res.per_date_t, dates=res.dates,
        spec=spec, reps=null.reps, seed=null.seed,
    )
