"""Mini-batch BPTT training with ADAM."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import rng as rngmod
from .network import RecurrentNetwork, backward, forward, predict
from .optim import AdamState, adam_step, clip_global_norm


class TrainingDiverged(FloatingPointError):
    """Loss became non-finite; ``history`` holds the finite epochs."""

    def __init__(self, epoch: int, history: list[float]):
        self.epoch = epoch
        self.history = list(history)
        last = len(history)
        super().__init__(
            f"training diverged at epoch {epoch}; last finite epoch {last}"
            + (f" (rmse {history[-1]:.6g})" if history else "")
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    loss: str = "mse"
    shuffle: bool = True
    seed: int = rngmod.DEFAULT_SEED
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float | None = 5.0
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.loss != "mse":
            raise ValueError(f"unsupported loss {self.loss!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def rmse_scaled(net: RecurrentNetwork, features, labels) -> float:
    pred = predict(net, features)
    return float(np.sqrt(np.mean((pred - labels) ** 2)))


def train(net: RecurrentNetwork, dataset, cfg: TrainConfig, on_epoch=None):
    """Train a copy of ``net`` on ``dataset``.

    Each batch minimises half the mean squared error; the reported history is
    the full training-set RMSE (scaled units, dropout off) after every epoch.
    ``on_epoch(epoch, net, rmse)`` is called after each epoch if given.

    Returns ``(trained_net, history)``.
    """
    features = np.asarray(dataset.features, dtype=np.float64)
    labels = np.asarray(dataset.labels, dtype=np.float64)
    if len(labels) == 0:
        raise ValueError("cannot train on an empty dataset")
    if features.shape[1] != net.lookback:
        raise ValueError(
            f"dataset lookback {features.shape[1]} does not match network lookback {net.lookback}"
        )
    net = net.copy()
    adam = AdamState.for_params(
        net.params, alpha=cfg.learning_rate, beta1=cfg.beta1,
        beta2=cfg.beta2, epsilon=cfg.epsilon,
    )
    shuffle_rng = rngmod.stream(cfg.seed, rngmod.SHUFFLE)
    dropout_rng = rngmod.stream(cfg.seed, rngmod.DROPOUT) if net.dropout > 0 else None
    n = len(labels)
    history: list[float] = []
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            pred, cache = forward(net, features[idx], dropout_rng)
            resid = pred - labels[idx]
            if not np.all(np.isfinite(resid)):
                raise TrainingDiverged(epoch, history)
            grads = backward(net, cache, resid / len(idx))
            if cfg.weight_decay:
                for name, g in grads.items():
                    if name.startswith("W_"):
                        g += cfg.weight_decay / len(idx) * net.params[name]
            clip_global_norm(grads, cfg.clip_norm)
            try:
                adam_step(net.params, grads, adam)
            except FloatingPointError:
                raise TrainingDiverged(epoch, history) from None
        loss = rmse_scaled(net, features, labels)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch, history)
        history.append(loss)
        if on_epoch is not None:
            on_epoch(epoch, net, loss)
    return net, history
