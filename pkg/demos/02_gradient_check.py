"""Checking backpropagation through time against finite differences.

For each cell type a few random networks are built, and the analytic
gradient of a random linear function of the predictions is compared with
central differences, entry by entry.
"""
from pricecast.neural.gradcheck import check_gradients

for kind in ("rnn", "gru_simple", "gru_full", "lstm"):
    res = check_gradients(kind, hidden=4, lookback=3, trials=20)
    print(f"{kind:<11} worst relative error {res.worst_norm_rel:.2e}  "
          f"{'ok' if res.passed() else 'MISMATCH'}")

# dropout is a fixed mask during one step, so the check still applies
res = check_gradients("lstm", hidden=4, lookback=3, trials=20, dropout=0.3)
print(f"lstm + dropout worst relative error {res.worst_norm_rel:.2e}")
