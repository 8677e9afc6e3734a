"""Comparing two forecasts and averaging them.

Two synthetic forecasters with different error profiles are scored, tested
for equal accuracy and combined under each weighting scheme.
"""
import numpy as np

from pricecast.combine import evaluate_combinations
from pricecast.evaluation import hln_test

rng = np.random.default_rng(4)
actual = 60 + np.cumsum(rng.standard_normal(200))
steady = actual + rng.normal(0.0, 1.0, 200)       # unbiased, noisy
biased = actual + rng.normal(0.8, 0.5, 200)       # precise but offset

res = hln_test(actual - steady, actual - biased)
print(f"HLN statistic {res.statistic:.3f}, p = {res.p_value:.3f}")

# weights fitted on the first half, scored on the second
rows = evaluate_combinations({"steady": steady, "biased": biased}, actual,
                             fit_window=(0, 100), eval_window=(100, 200))
for r in rows:
    w = ", ".join(f"{k}={v:.2f}" for k, v in r.weights.items())
    mark = " <- best RMSE" if r.best_rmse else ""
    print(f"{r.name:<14} RMSE {r.rmse:.3f}  MAPE {r.mape:.2f}%  {w}{mark}")
