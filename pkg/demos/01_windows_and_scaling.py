"""Turning a monthly price series into supervised windows.

Run with ``python demos/01_windows_and_scaling.py``.
"""
import numpy as np

from pricecast.data import bundled_path, fit_scaler, load_series, make_windows, train_test_split

cotton = load_series(bundled_path("cotton"), "cotton")
print(f"{len(cotton)} months, {cotton.start}..{cotton.end}")

# chronological 70/30 split; no shuffling across the cut
train, test = train_test_split(cotton, 0.7)
print(f"train {len(train)} months, test {len(test)} months (first test month {test.dates[0]})")

# the scaler only sees training prices, so test values may leave [0, 1]
scaler = fit_scaler(train)
z_train = scaler.apply(train.values)
z_test = scaler.apply(test.values)
print(f"scaled train range [{z_train.min():.2f}, {z_train.max():.2f}], "
      f"test range [{z_test.min():.2f}, {z_test.max():.2f}]")

# each row holds `lookback` consecutive months and the label is the next month
ds = make_windows(z_train, lookback=4)
print("windowed shape (samples, stride, lookback):", ds.shape)
print("first window", np.round(ds.features[0], 4), "-> label", round(float(ds.labels[0]), 4))

# predictions come back in price units through the inverse map
print("round trip error:", float(np.max(np.abs(scaler.invert(z_test) - test.values))))
