"""Correlogram, Schwarz order selection and one-step forecasts.

A simulated ARMA(2, 1) stands in for a differenced price series so the
recovered orders can be checked against the truth.
"""
import numpy as np

from pricecast import arima as ar

rng = np.random.default_rng(7)
x = ar.simulate_arma(1200, ar=(0.5, 0.2), ma=(0.4,), mean=2.0, rng=rng)

print("lag  acf     pacf")
for k, (r, p) in enumerate(zip(ar.acf(x, 6), ar.pacf(x, 6))):
    print(f"{k:>3}  {r:+.3f}  {p:+.3f}")

spec, table = ar.select_order(x[:1000], p_max=3, q_max=3)
print("selected", spec)
best = sorted((t for t in table if not t.error), key=lambda t: t.sic)[:3]
for t in best:
    print(f"  ARMA({t.p},{t.q}) SIC {t.sic:.2f}")

model = ar.fit_arma(x[:1000], spec, condition=3)
print("AR", np.round(model.ar, 3), "MA", np.round(model.ma, 3), "mean", round(model.mean, 3))

fc = ar.rolling_forecast(model, x[:1000], x[1000:])
print("test RMSE of one-step forecasts:", round(float(np.sqrt(np.mean((fc - x[1000:]) ** 2))), 4))
