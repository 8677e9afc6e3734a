"""A small LSTM learning a noiseless sine wave.

Shows the training loop, its per-epoch history and that a fixed seed
reproduces the run exactly.
"""
import numpy as np

from pricecast.data import make_windows
from pricecast.neural import TrainConfig, init_network, predict, train

t = np.arange(500)
wave = np.sin(2 * np.pi * t / 50)
wave = (wave - wave.min()) / (wave.max() - wave.min())
data = make_windows(wave, lookback=4)

net = init_network("lstm", hidden_units=16, lookback=4, seed=3)
cfg = TrainConfig(epochs=100, batch_size=32, seed=3)
trained, history = train(net, data, cfg)

for epoch in (1, 10, 50, 100):
    print(f"epoch {epoch:>3}: training RMSE {history[epoch - 1]:.5f}")

again, history2 = train(net, data, cfg)
print("identical rerun:", history == history2)

# one-step forecasts continue the wave
window = wave[-4:]
print("next value predicted", float(predict(trained, window)[0]),
      "true", float((np.sin(2 * np.pi * 500 / 50) + 1) / 2))
