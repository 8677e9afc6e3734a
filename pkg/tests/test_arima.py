import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import linalg

from pricecast import arima as ar


def _sim(n, ar_=(), ma=(), mean=0.0, seed=0):
    return ar.simulate_arma(n, ar_, ma, mean, rng=np.random.default_rng(seed))


def test_acf_matches_direct_sum(rng):
    x = rng.standard_normal(300)
    xc = x - x.mean()
    want = [sum(xc[t] * xc[t + k] for t in range(300 - k)) / sum(xc * xc) for k in range(6)]
    np.testing.assert_allclose(ar.acf(x, 5), want, rtol=0, atol=1e-13)


def test_pacf_matches_yule_walker(rng):
    x = _sim(800, (0.5, -0.3), seed=4)
    r = ar.acf(x, 8)
    want = [1.0]
    for k in range(1, 9):
        phi = linalg.solve(linalg.toeplitz(r[:k]), r[1:k + 1])
        want.append(phi[-1])
    np.testing.assert_allclose(ar.pacf(x, 8), want, rtol=0, atol=1e-12)


def test_acf_guards():
    with pytest.raises(ValueError, match="n/2"):
        ar.acf(np.arange(10.0), 5)
    with pytest.raises(ValueError, match="constant"):
        ar.acf(np.ones(20), 2)


@given(arrays(np.float64, st.integers(4, 40), elements=st.floats(-1e3, 1e3)), st.integers(0, 3))
def test_integrate_inverts_difference(x, d):
    back = ar.integrate(ar.difference(x, d), x[:d], d)
    np.testing.assert_allclose(back, x[d:], rtol=1e-9, atol=1e-6)


def test_difference_frozen():
    np.testing.assert_array_equal(ar.difference([1.0, 4.0, 9.0, 16.0], 2), [2.0, 2.0])
    with pytest.raises(ValueError):
        ar.difference([1.0, 2.0], 2)


def test_pure_ar_css_equals_ols():
    x = _sim(600, (0.6, -0.2), mean=3.0, seed=1)
    m = ar.fit_arma(x, (2, 0), gtol=1e-10)
    X = np.column_stack([np.ones(598), x[1:599], x[0:598]])
    c, p1, p2 = linalg.lstsq(X, x[2:])[0]
    np.testing.assert_allclose(m.ar, [p1, p2], atol=1e-6)
    assert m.mean == pytest.approx(c / (1 - p1 - p2), abs=1e-5)
    assert m.n_used == 598 and m.condition == 2


def test_ma_sign_convention_and_innovations():
    # positive theta subtracts the previous innovation
    eps = np.random.default_rng(2).standard_normal(400)
    y = eps.copy()
    y[1:] -= 0.4 * eps[:-1]
    m = ar.fit_arma(y, (0, 1), gtol=1e-10)
    assert m.ma[0] > 0
    # re-derive the innovations by hand from the fitted values
    e = np.zeros(400)
    for t in range(400):
        e[t] = y[t] - m.mean + m.ma[0] * (e[t - 1] if t else 0.0)
    np.testing.assert_allclose(m.residuals, e, atol=1e-10)
    assert m.css == pytest.approx(float(e @ e), rel=1e-12)


def test_css_gradient_matches_numeric():
    z = _sim(300, (0.5,), (0.3,), seed=3)
    beta = np.array([0.1, 0.4, 0.2])
    f, g = ar._css_and_grad(beta, z, 1, 1, 1)
    h = 1e-6
    num = [(ar._css_and_grad(beta + h * e, z, 1, 1, 1)[0]
            - ar._css_and_grad(beta - h * e, z, 1, 1, 1)[0]) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(g, num, rtol=1e-6, atol=1e-9)


def test_arma21_recovery():
    x = _sim(4000, (0.5, 0.2), (0.4,), mean=1.0, seed=7)
    m = ar.fit_arma(x, (2, 1))
    np.testing.assert_allclose(m.ar, [0.5, 0.2], atol=0.08)
    assert m.ma[0] == pytest.approx(0.4, abs=0.08)
    assert m.mean == pytest.approx(1.0, abs=0.3)


def test_sic_formula():
    assert ar.sic(2.0, 100, 3) == pytest.approx(100 * math.log(0.02) + 3 * math.log(100))
    m = ar.fit_arma(_sim(300, (0.4,), seed=5), (1, 0))
    assert m.sic == pytest.approx(m.n_used * math.log(m.css / m.n_used) + 2 * math.log(m.n_used))


def test_select_order_common_sample_and_table():
    x = _sim(500, seed=11)
    spec, table = ar.select_order(x, 2, 2)
    assert len(table) == 9
    assert [(t.p, t.q) for t in table] == [(p, q) for p in range(3) for q in range(3)]
    assert {t.n_used for t in table if not t.error} == {498}
    assert (spec.p, spec.q) == (0, 0)


def test_select_order_parallel_matches_serial():
    x = _sim(300, (0.6,), seed=12)
    a = ar.select_order(x, 2, 1)
    b = ar.select_order(x, 2, 1, n_jobs=2)
    assert a[0] == b[0]
    assert [t.sic for t in a[1]] == [t.sic for t in b[1]]


def test_root_checks_reject_explosive_fit():
    e = np.random.default_rng(0).standard_normal(300)
    x = np.zeros(300)
    for t in range(1, 300):
        x[t] = 1.03 * x[t - 1] + e[t]
    with pytest.raises(ar.ArmaEstimationError, match="AR polynomial"):
        ar.fit_arma(x, (1, 0))


def test_min_root_modulus():
    assert ar.min_root_modulus([0.5]) == pytest.approx(2.0)
    assert ar.min_root_modulus([]) == math.inf


def test_rolling_forecast_uses_only_past():
    x = _sim(400, (0.7,), mean=5.0, seed=9) + np.linspace(0, 3, 400)
    tr, te = x[:300], x[300:]
    m = ar.fit_arma(tr, (1, 1, 0))
    fc = ar.rolling_forecast(m, tr, te)
    # hand recursion on differences: dx_hat_t = mean + phi (dx_{t-1} - mean)
    dx = np.diff(x)
    want = [x[t - 1] + m.mean + m.ar[0] * (dx[t - 2] - m.mean) for t in range(300, 400)]
    np.testing.assert_allclose(fc, want, atol=1e-10)
    # changing the future leaves earlier forecasts untouched
    te2 = te.copy()
    te2[50:] += 100
    np.testing.assert_allclose(ar.rolling_forecast(m, tr, te2)[:51], fc[:51], rtol=1e-14)


def test_rolling_refit_first_point_matches_static():
    x = _sim(260, (0.5,), seed=10)
    m = ar.fit_arma(x[:250], (1, 0))
    static = ar.rolling_forecast(m, x[:250], x[250:])
    refit = ar.rolling_forecast(m, x[:250], x[250:], refit=True)
    assert refit[0] == static[0]
    assert np.all(np.isfinite(refit))


def test_model_json_round_trip():
    m = ar.fit_arma(_sim(300, (0.3,), (0.2,), seed=2), (1, 0, 1))
    back = ar.ArmaModel.from_dict(__import__("json").loads(m.to_json()))
    assert back.spec == m.spec
    np.testing.assert_array_equal(back.ar, m.ar)
    np.testing.assert_array_equal(back.ma, m.ma)
    y = _sim(50, seed=3)
    np.testing.assert_array_equal(ar.one_step_predictions(back, y)[2:],
                                  ar.one_step_predictions(m, y)[2:])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 10_000))
def test_fit_is_admissible(p, q, seed):
    x = _sim(300, seed=seed)
    try:
        m = ar.fit_arma(x, (p, q))
    except ar.ArmaEstimationError:
        return
    assert ar.min_root_modulus(m.ar) > 1.0 and ar.min_root_modulus(m.ma) > 1.0
    assert m.css > 0 and len(m.residuals) == m.n_used
