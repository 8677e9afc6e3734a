"""Box-Jenkins tools: correlogram, differencing, CSS estimation of ARMA(p, q),
Schwarz order selection and one-step rolling forecasts.

Sign convention follows the lag-polynomial form

    (1 - phi_1 L - ... - phi_p L^p)(1 - L)^d (Y_t - mean)
        = (1 - theta_1 L - ... - theta_q L^q) eps_t

so a positive ``theta_1`` *subtracts* the previous innovation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal

from .parallel import parallel_map


class ArmaEstimationError(RuntimeError):
    """Optimizer failure or a fitted polynomial with roots on/inside the unit circle."""


# ---------------------------------------------------------------- correlogram

def acf(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations ``r_0..r_max_lag`` (biased, ``r_0 = 1``)."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if max_lag < 0 or max_lag >= n / 2:
        raise ValueError(f"max_lag must be < n/2 = {n / 2}, got {max_lag}")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise ValueError("autocorrelation of a constant series is undefined")
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        out[k] = np.dot(xc[: n - k], xc[k:]) / denom
    return out


def pacf(x, max_lag: int) -> np.ndarray:
    """Partial autocorrelations via the Durbin-Levinson recursion.

    Element 0 is 1 by convention; element ``k`` is ``phi_kk``.
    """
    r = acf(x, max_lag)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    phi = np.zeros(0)
    v = 1.0
    for k in range(1, max_lag + 1):
        phi_kk = (r[k] - np.dot(phi, r[k - 1:0:-1])) / v
        phi = np.concatenate([phi - phi_kk * phi[::-1], [phi_kk]])
        v *= 1.0 - phi_kk * phi_kk
        out[k] = phi_kk
    return out


# ---------------------------------------------------------------- differencing

def difference(x, d: int) -> np.ndarray:
    """Apply ``(1 - L)^d``; the result is ``d`` points shorter."""
    x = np.asarray(x, dtype=np.float64)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if len(x) <= d:
        raise ValueError(f"series of length {len(x)} is too short to difference {d} times")
    return np.diff(x, n=d) if d else x.copy()


def integrate(diffs, anchors, d: int) -> np.ndarray:
    """Invert :func:`difference`.

    ``anchors`` are the ``d`` level values immediately preceding the first
    differenced value, so ``integrate(difference(x, d), x[:d], d) == x[d:]``.
    """
    diffs = np.asarray(diffs, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.float64)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if len(anchors) != d:
        raise ValueError(f"need exactly {d} anchor values, got {len(anchors)}")
    level = diffs
    for j in range(d - 1, -1, -1):
        start = np.diff(anchors, n=j)[-1]
        level = start + np.cumsum(level)
    return level.copy() if d == 0 else level


def _undiff_offset(levels: np.ndarray, d: int) -> np.ndarray:
    # y_t - (1-L)^d y_t, a function of y_{t-1}..y_{t-d} only; aligned to t = d..n-1
    n = len(levels)
    out = np.zeros(n - d)
    for k in range(1, d + 1):
        out -= (-1) ** k * math.comb(d, k) * levels[d - k:n - k]
    return out


# ---------------------------------------------------------------- model types

@dataclass(frozen=True)
class ArmaSpec:
    p: int
    d: int = 0
    q: int = 0

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError("ARIMA orders must be nonnegative")

    @property
    def n_params(self) -> int:
        # mean + AR + MA
        return self.p + self.q + 1

    def __str__(self) -> str:
        return f"ARIMA({self.p},{self.d},{self.q})"


@dataclass
class ArmaModel:
    spec: ArmaSpec
    mean: float
    ar: np.ndarray
    ma: np.ndarray
    sigma2: float
    residuals: np.ndarray = field(repr=False)
    css: float
    n_used: int
    condition: int
    converged: bool = True
    iterations: int = 0

    @property
    def loglik_proxy(self) -> float:
        return self.css

    @property
    def sic(self) -> float:
        return sic(self.css, self.n_used, self.spec.n_params)

    def to_dict(self) -> dict:
        return {
            "format": "pricecast-arma/1",
            "p": self.spec.p, "d": self.spec.d, "q": self.spec.q,
            "mean": self.mean,
            "ar": [float(v) for v in self.ar],
            "ma": [float(v) for v in self.ma],
            "sigma2": self.sigma2,
            "css": self.css,
            "n_used": self.n_used,
            "condition": self.condition,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ArmaModel":
        return cls(
            ArmaSpec(doc["p"], doc["d"], doc["q"]), doc["mean"],
            np.array(doc["ar"], dtype=float), np.array(doc["ma"], dtype=float),
            doc["sigma2"], np.zeros(0), doc["css"], doc["n_used"], doc["condition"],
        )


def sic(css: float, n: int, k: int) -> float:
    """Schwarz criterion ``n ln(css/n) + k ln(n)``."""
    return n * math.log(css / n) + k * math.log(n)


def min_root_modulus(coefs) -> float:
    """Smallest root modulus of ``1 - c_1 z - ... - c_k z^k`` (inf if k = 0)."""
    coefs = np.asarray(coefs, dtype=np.float64)
    if coefs.size == 0 or np.all(coefs == 0):
        return math.inf
    poly = np.concatenate([-coefs[::-1], [1.0]])
    poly = np.trim_zeros(poly, "f")
    if len(poly) == 1:
        return math.inf
    return float(np.min(np.abs(np.roots(poly))))


# ---------------------------------------------------------------- CSS machinery

def _innovations(z, mean, ar, ma, start):
    """Innovations for t = start..n-1 with pre-sample innovations zero."""
    p = len(ar)
    zc = z - mean
    w = zc[start:].copy()
    for i in range(1, p + 1):
        w -= ar[i - 1] * zc[start - i:len(z) - i]
    if len(ma):
        return signal.lfilter([1.0], np.concatenate([[1.0], -ma]), w), zc
    return w, zc


def _css_and_grad(beta, z, p, q, start):
    mean, ar, ma = beta[0], beta[1:1 + p], beta[1 + p:]
    eps, zc = _innovations(z, mean, ar, ma, start)
    if not np.all(np.isfinite(eps)) or np.max(np.abs(eps)) > 1e150:
        return np.inf, np.full(len(beta), np.nan)
    m = len(eps)
    a_poly = np.concatenate([[1.0], -ma])
    filt = (lambda v: signal.lfilter([1.0], a_poly, v)) if q else (lambda v: v)
    cols = [filt(np.full(m, -(1.0 - ar.sum())))]
    for i in range(1, p + 1):
        cols.append(filt(-zc[start - i:len(z) - i]))
    for j in range(1, q + 1):
        lagged = np.concatenate([np.zeros(j), eps[:m - j]])
        cols.append(filt(lagged))
    jac = np.column_stack(cols)
    return float(eps @ eps) / m, 2.0 * (jac.T @ eps) / m


def hannan_rissanen(z, p: int, q: int, start: int | None = None) -> np.ndarray:
    """Two-stage least-squares starting values ``[mean, ar..., ma...]``."""
    z = np.asarray(z, dtype=np.float64)
    n = len(z)
    mean = float(z.mean())
    zc = z - mean
    beta = np.zeros(1 + p + q)
    beta[0] = mean
    if p + q == 0:
        return beta
    if q == 0:
        y = zc[p:]
        X = np.column_stack([zc[p - i:n - i] for i in range(1, p + 1)])
        beta[1:] = np.linalg.lstsq(X, y, rcond=None)[0]
        return _shrink_to_admissible(beta, p, q)
    m = int(min(max(p + q + 1, round(10 * math.log10(n))), n // 4))
    y = zc[m:]
    X = np.column_stack([zc[m - i:n - i] for i in range(1, m + 1)])
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    resid = np.zeros(n)
    resid[m:] = y - X @ coef
    s = m + max(p, q)
    y2 = zc[s:]
    X2 = np.column_stack(
        [zc[s - i:n - i] for i in range(1, p + 1)]
        + [resid[s - j:n - j] for j in range(1, q + 1)]
    )
    coef2 = np.linalg.lstsq(X2, y2, rcond=None)[0]
    beta[1:1 + p] = coef2[:p]
    beta[1 + p:] = -coef2[p:]
    return _shrink_to_admissible(beta, p, q)


def _shrink_to_admissible(beta, p, q):
    beta = beta.copy()
    for sl in (slice(1, 1 + p), slice(1 + p, 1 + p + q)):
        for _ in range(60):
            if min_root_modulus(beta[sl]) > 1.05:
                break
            beta[sl] *= 0.9
    return beta


def fit_arma(series, spec: ArmaSpec | tuple, condition: int | None = None,
             maxiter: int = 500, gtol: float = 1e-8, root_margin: float = 1e-6,
             start_params=None) -> ArmaModel:
    """Conditional-sum-of-squares ARMA fit.

    The series is differenced ``spec.d`` times, then the mean, AR and MA
    coefficients minimise the sum of squared innovations for
    ``t >= condition`` (default ``p``), with pre-sample innovations zero.
    BFGS with an analytic gradient starts from Hannan-Rissanen values.

    Raises :class:`ArmaEstimationError` if the optimizer fails or the fitted
    AR/MA polynomial has a root within ``1 + root_margin`` of the origin.
    """
    if isinstance(spec, tuple):
        spec = ArmaSpec(*spec) if len(spec) == 3 else ArmaSpec(spec[0], 0, spec[1])
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("series must be finite")
    z = difference(x, spec.d)
    p, q = spec.p, spec.q
    start = p if condition is None else int(condition)
    if start < p:
        raise ValueError(f"condition ({start}) must be at least p ({p})")
    if len(z) - start < p + q + 2:
        raise ValueError(f"{len(z)} observations are too few for {spec}")
    beta0 = hannan_rissanen(z, p, q) if start_params is None else np.asarray(start_params, float)
    iterations = 0
    converged = True
    if p + q == 0:
        beta = np.array([z[start:].mean()])
    else:
        res = optimize.minimize(
            _css_and_grad, beta0, args=(z, p, q, start), jac=True, method="BFGS",
            options={"gtol": gtol, "maxiter": maxiter},
        )
        beta = res.x
        iterations = int(res.nit)
        gnorm = float(np.max(np.abs(res.jac))) if np.all(np.isfinite(res.jac)) else np.inf
        if not np.isfinite(res.fun):
            raise ArmaEstimationError(f"{spec}: CSS objective diverged")
        if not res.success:
            # BFGS stops on lost precision near the optimum; accept a tiny gradient
            scale = max(1.0, abs(float(res.fun)))
            if res.status == 1 or gnorm > 1e-5 * scale:
                raise ArmaEstimationError(f"{spec}: optimizer did not converge ({res.message})")
            converged = False
    mean, ar, ma = float(beta[0]), beta[1:1 + p].copy(), beta[1 + p:].copy()
    if min_root_modulus(ar) <= 1.0 + root_margin:
        raise ArmaEstimationError(f"{spec}: AR polynomial not stationary (root on/inside unit circle)")
    if min_root_modulus(ma) <= 1.0 + root_margin:
        raise ArmaEstimationError(f"{spec}: MA polynomial not invertible (root on/inside unit circle)")
    eps, _ = _innovations(z, mean, ar, ma, start)
    css = float(eps @ eps)
    n_used = len(eps)
    return ArmaModel(spec, mean, ar, ma, css / n_used, eps, css, n_used, start,
                     converged, iterations)


# ---------------------------------------------------------------- order selection

@dataclass
class OrderTrial:
    p: int
    q: int
    sic: float
    css: float
    n_used: int
    error: str = ""


def _fit_for_table(args):
    x, p, d, q, start, maxiter, gtol = args
    try:
        m = fit_arma(x, ArmaSpec(p, d, q), condition=start, maxiter=maxiter, gtol=gtol)
        return OrderTrial(p, q, m.sic, m.css, m.n_used)
    except (ArmaEstimationError, ValueError, np.linalg.LinAlgError) as exc:
        return OrderTrial(p, q, math.nan, math.nan, 0, str(exc))


def select_order(series, p_max: int, q_max: int, d: int = 0, n_jobs: int = 1,
                 maxiter: int = 500, gtol: float = 1e-8):
    """Fit every ARMA(p, q) with p <= p_max, q <= q_max; pick minimum SIC.

    All candidates are conditioned on the first ``p_max`` observations so
    their criteria are computed on the same sample. Failed fits stay in the
    table with an error message and are not eligible.

    Returns ``(best_spec, table)``; the table is ordered by ``(p, q)``.
    """
    if not (0 <= p_max <= 12 and 0 <= q_max <= 12):
        raise ValueError("p_max and q_max must lie in 0..12")
    x = np.asarray(getattr(series, "values", series), dtype=np.float64)
    jobs = [(x, p, d, q, p_max, maxiter, gtol)
            for p in range(p_max + 1) for q in range(q_max + 1)]
    table = parallel_map(_fit_for_table, jobs, n_jobs)
    ok = [t for t in table if not t.error]
    if not ok:
        raise ArmaEstimationError("every candidate order failed to fit")
    best = min(ok, key=lambda t: (t.sic, t.p + t.q, t.p))
    return ArmaSpec(best.p, d, best.q), table


# ---------------------------------------------------------------- forecasting

def one_step_predictions(model: ArmaModel, levels) -> np.ndarray:
    """One-step-ahead level predictions from the fitted filter.

    Element ``t`` uses only ``levels[:t]``; entries before the filter start
    (``d + condition``) are NaN.
    """
    y = np.asarray(levels, dtype=np.float64)
    d = model.spec.d
    z = difference(y, d)
    start = model.condition
    eps, _ = _innovations(z, model.mean, model.ar, model.ma, start)
    if not np.all(np.isfinite(eps)):
        raise FloatingPointError("ARMA filter diverged")
    z_hat = z[start:] - eps
    out = np.full(len(y), np.nan)
    offset = _undiff_offset(y, d)[start:] if d else 0.0
    out[d + start:] = z_hat + offset
    return out


def rolling_forecast(model_or_spec, train, test, refit: bool = False,
                     maxiter: int = 500, gtol: float = 1e-8) -> np.ndarray:
    """One-step-ahead forecasts for every test point.

    With ``refit=False`` the coefficients are those of ``model_or_spec``
    (fitted on ``train`` if a spec is passed) and the filter simply runs on
    through the test period. With ``refit=True`` the model is re-estimated on
    all data before each forecast origin.
    """
    tr = np.asarray(getattr(train, "values", train), dtype=np.float64)
    te = np.asarray(getattr(test, "values", test), dtype=np.float64)
    full = np.concatenate([tr, te])
    if isinstance(model_or_spec, ArmaModel):
        model = model_or_spec
    else:
        model = fit_arma(tr, model_or_spec, maxiter=maxiter, gtol=gtol)
    if not refit:
        return one_step_predictions(model, full)[len(tr):]
    out = np.empty(len(te))
    current = model
    for i in range(len(te)):
        cut = len(tr) + i
        if i > 0:
            beta0 = np.concatenate([[current.mean], current.ar, current.ma])
            current = fit_arma(full[:cut], current.spec, condition=model.condition,
                               maxiter=maxiter, gtol=gtol, start_params=beta0)
        out[i] = one_step_predictions(current, full[:cut + 1])[cut]
    return out


def simulate_arma(n: int, ar=(), ma=(), mean: float = 0.0, sigma: float = 1.0,
                  rng: np.random.Generator | None = None, burn: int = 200) -> np.ndarray:
    """Draw an ARMA path in this module's sign convention (Gaussian innovations)."""
    rng = rng if rng is not None else np.random.default_rng()
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    eps = rng.standard_normal(n + burn) * sigma
    x = signal.lfilter(np.concatenate([[1.0], -ma]), np.concatenate([[1.0], -ar]), eps)
    return x[burn:] + mean
