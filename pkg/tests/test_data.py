import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pricecast.data import (DataError, MinMaxScaler, PriceSeries, fit_scaler, load_series,
                            make_windows, train_test_split)

from conftest import month_range, write_prices

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_bundled_series_shape(cotton, oil):
    for s in (cotton, oil):
        assert len(s) == 708
        assert (s.start, s.end) == ("1960-01", "2018-12")
        assert np.all(s.values > 0)


def test_bundled_split_sizes(cotton):
    train, test = train_test_split(cotton, 0.7)
    assert (len(train), len(test)) == (495, 213)
    assert train.dates[-1] == "2001-03"
    assert test.dates[0] == "2001-04"


def test_missing_column_lists_available(tmp_path):
    path = write_prices(tmp_path / "p.csv", month_range(2000, 3), {"a": [1, 2, 3], "b": [4, 5, 6]})
    with pytest.raises(DataError, match="available: a, b"):
        load_series(path, "zzz")


def test_gap_names_missing_month(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,x\n2000-01,1\n2000-02,2\n2000-04,3\n")
    with pytest.raises(DataError, match=r"row 4: gap in months, missing 2000-03"):
        load_series(path, "x")


def test_non_numeric_row_number(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,x\n2000-01,1\n2000-02,n/a\n")
    with pytest.raises(DataError, match=r"row 3: non-numeric value 'n/a'"):
        load_series(path, "x")


def test_duplicate_and_bad_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,x\n2000-01,1\n2000-01,2\n")
    with pytest.raises(DataError, match="duplicate month 2000-01"):
        load_series(path, "x")
    path.write_text("month,x\n2000-01,1\n")
    with pytest.raises(DataError, match="first column must be 'date'"):
        load_series(path, "x")
    with pytest.raises(DataError, match="no such file"):
        load_series(tmp_path / "missing.csv", "x")


def test_rows_are_sorted(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,x\n2000-03,3\n2000-01,1\n2000-02,2\n")
    s = load_series(path, "x")
    assert list(s.dates) == ["2000-01", "2000-02", "2000-03"]
    np.testing.assert_array_equal(s.values, [1.0, 2.0, 3.0])


def test_values_read_only(cotton):
    with pytest.raises(ValueError):
        cotton.values[0] = 0.0


@given(n=st.integers(2, 400), ratio=st.floats(0.05, 0.95))
def test_split_is_floor_and_chronological(n, ratio):
    s = PriceSeries("x", month_range(1990, n), np.arange(n, dtype=float))
    cut = int(np.floor(ratio * n))
    if cut < 1 or cut >= n:
        with pytest.raises(DataError):
            train_test_split(s, ratio)
        return
    train, test = train_test_split(s, ratio)
    assert len(train) == cut and len(test) == n - cut
    np.testing.assert_array_equal(np.concatenate([train.values, test.values]), s.values)


def test_scaler_frozen_values():
    sc = fit_scaler(np.array([2.0, 4.0, 10.0]))
    assert (sc.lo, sc.hi) == (2.0, 10.0)
    np.testing.assert_allclose(sc.apply([2.0, 6.0, 12.0]), [0.0, 0.5, 1.25], rtol=0, atol=1e-15)
    with pytest.raises(DataError, match="constant"):
        fit_scaler(np.ones(5))


@given(arrays(np.float64, st.integers(2, 50), elements=finite))
def test_scaler_roundtrip(x):
    if np.ptp(x) == 0:
        return
    sc = fit_scaler(x)
    z = sc.apply(x)
    assert z.min() == 0.0 and z.max() == 1.0
    np.testing.assert_allclose(sc.invert(z), x, rtol=1e-9, atol=1e-9 * np.abs(x).max())


def test_windows_frozen():
    ds = make_windows(np.arange(5.0), 2)
    np.testing.assert_array_equal(ds.features, [[0, 1], [1, 2], [2, 3]])
    np.testing.assert_array_equal(ds.labels, [2, 3, 4])
    assert ds.shape == (3, 1, 2)
    assert ds.as_3d().shape == (3, 1, 2)


@settings(max_examples=60)
@given(x=arrays(np.float64, st.integers(2, 60), elements=finite), mu=st.integers(1, 12))
def test_windows_alignment(x, mu):
    if len(x) <= mu:
        with pytest.raises(DataError):
            make_windows(x, mu)
        return
    ds = make_windows(x, mu)
    m = len(x)
    assert ds.features.shape == (m - mu, mu)
    for i in range(m - mu):
        np.testing.assert_array_equal(ds.features[i], x[i:i + mu])
        assert ds.labels[i] == x[i + mu]


def test_windows_reject_stride():
    with pytest.raises(DataError):
        make_windows(np.arange(10.0), 2, stride=2)


def test_scaler_type():
    assert isinstance(fit_scaler([0.0, 1.0]), MinMaxScaler)
