import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from pricecast.evaluation import ForecastSet, hln_test, mape, rmse


def test_rmse_mape_frozen():
    assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 5.0]) == pytest.approx(math.sqrt(4 / 3))
    assert mape([100.0, 200.0], [110.0, 180.0]) == pytest.approx(10.0)
    with pytest.raises(ValueError, match="zero"):
        mape([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        rmse([1.0], [1.0, 2.0])


def _oracle_hln(ea, eb, h):
    d = [a * a - b * b for a, b in zip(ea, eb)]
    n = len(d)
    dbar = sum(d) / n
    gam = [sum((d[t] - dbar) * (d[t - k] - dbar) for t in range(k, n)) / n for k in range(h)]
    v = (gam[0] + 2 * sum(gam[1:])) / n
    stat = dbar / math.sqrt(v) * math.sqrt((n + 1 - 2 * h + h * (h - 1) / n) / n)
    return stat, 2 * stats.t.sf(abs(stat), n - 1)


@pytest.mark.parametrize("h", [1, 2, 3])
def test_hln_matches_hand_formula(h, rng):
    ea = rng.standard_normal(60)
    eb = 1.3 * rng.standard_normal(60)
    res = hln_test(ea, eb, h)
    stat, p = _oracle_hln(ea, eb, h)
    assert res.statistic == pytest.approx(stat, rel=1e-12)
    assert res.p_value == pytest.approx(p, rel=1e-10)
    assert not res.degenerate


def test_hln_frozen_small_case():
    ea = np.array([1.0, -2.0, 0.5, 1.5, -1.0, 2.0, 0.0, -0.5, 1.0, 1.0])
    eb = np.array([0.5, -1.0, 0.5, 1.0, -1.5, 1.0, 0.5, -0.5, 0.5, 0.0])
    res = hln_test(ea, eb)
    # d = [0.75, 3, 0, 1.25, -1.25, 3, -0.25, 0, 0.75, 1]; mean 0.825
    d = ea ** 2 - eb ** 2
    assert res.mean_loss_diff == pytest.approx(0.825)
    v = np.mean((d - 0.825) ** 2)
    assert res.statistic == pytest.approx(0.825 / math.sqrt(v / 10) * math.sqrt(9 / 10), rel=1e-13)


def test_hln_sign_and_degenerate():
    e = np.linspace(-1, 1, 30)
    assert hln_test(0.5 * e, e).statistic < 0
    deg = hln_test(e, e)
    assert deg.degenerate and deg.p_value == 1.0 and deg.statistic == 0.0
    with pytest.raises(ValueError, match="10"):
        hln_test(e[:5], e[:5])


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 25, elements=st.floats(-10, 10)),
       arrays(np.float64, 25, elements=st.floats(-10, 10)))
def test_hln_antisymmetry(ea, eb):
    ab = hln_test(ea, eb)
    ba = hln_test(eb, ea)
    if ab.degenerate:
        assert ba.degenerate
        return
    assert ab.statistic == pytest.approx(-ba.statistic, rel=1e-9, abs=1e-12)
    assert ab.p_value == pytest.approx(ba.p_value, rel=1e-9, abs=1e-12)
    assert 0.0 <= ab.p_value <= 1.0


def test_forecast_set_inner_join():
    actual = {"2001-01": 1.0, "2001-02": 2.0, "2001-03": 3.0, "2001-04": 4.0}
    fs = ForecastSet.align(actual, {"a": {"2001-02": 2.5, "2001-03": 2.0, "2001-04": 4.0},
                                    "b": {"2001-01": 9.0, "2001-03": 3.0, "2001-04": 5.0}})
    assert fs.dates == ("2001-03", "2001-04")
    np.testing.assert_array_equal(fs.errors("a"), [1.0, 0.0])
    m = fs.metrics()
    assert m["b"]["rmse"] == pytest.approx(math.sqrt(0.5))
    with pytest.raises(ValueError, match="finite"):
        ForecastSet(("x",), [1.0], {"a": [np.nan]})
