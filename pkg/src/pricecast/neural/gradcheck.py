"""Central finite-difference checks for the BPTT gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from .cells import CellKind
from .network import RecurrentNetwork, backward, forward, init_network


def _objective(net, windows, weights, mask):
    # fixed dropout mask so the objective is a smooth function of the params
    pred, cache = forward(net, windows)
    if mask is not None:
        head = cache.a_final * mask
        pred = (head @ net.params["W_ya"].T + net.params["b_y"])[:, 0]
    return float(weights @ pred)


def numeric_gradient(net: RecurrentNetwork, windows, weights, mask=None, step: float = 1e-6):
    """Central differences of ``sum(weights * pred)`` for every parameter entry."""
    out = {}
    for name, theta in net.params.items():
        g = np.zeros_like(theta)
        flat = theta.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = _objective(net, windows, weights, mask)
            flat[i] = keep - step
            down = _objective(net, windows, weights, mask)
            flat[i] = keep
            gflat[i] = (up - down) / (2.0 * step)
        out[name] = g
    return out


def analytic_gradient(net: RecurrentNetwork, windows, weights, mask=None):
    pred, cache = forward(net, windows)
    if mask is not None:
        cache.mask = mask
        cache.head_input = cache.a_final * mask
    return backward(net, cache, weights)


@dataclass
class GradCheck:
    kind: str
    trials: int
    worst_norm_rel: float
    worst_entry_excess: float

    def passed(self, tol: float = 1e-5) -> bool:
        return self.worst_norm_rel < tol and self.worst_entry_excess <= 0.0


def relative_error(a, b) -> float:
    """``|a - b| / max(|a|, |b|)`` in the Euclidean norm (0 when both vanish)."""
    a = np.ravel(a)
    b = np.ravel(b)
    denom = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if denom == 0.0 else float(np.linalg.norm(a - b) / denom)


def check_gradients(kind, hidden: int = 4, lookback: int = 3, trials: int = 100,
                    batch: int = 2, dropout: float = 0.0, seed: int = rngmod.DEFAULT_SEED,
                    tol: float = 1e-5, abs_floor: float = 1e-9) -> GradCheck:
    """Compare BPTT against central differences on random networks and inputs.

    Each parameter array must agree in relative norm within ``tol``; each
    entry must satisfy ``|a - n| <= tol * max(|a|, |n|) + abs_floor``, where
    the floor absorbs the difference quotient's own rounding error on entries
    that are essentially zero.
    """
    kind = CellKind.parse(kind)
    worst_rel = 0.0
    worst_excess = -np.inf
    for trial in range(trials):
        rng = rngmod.stream(seed, "gradcheck", kind.value, trial)
        net = init_network(kind, hidden, 1, lookback, dropout, seed=seed * 1000 + trial)
        # random biases too, so gates are not all centred at zero
        for name, p in net.params.items():
            p[...] = rng.uniform(-1.0, 1.0, size=p.shape)
        windows = rng.uniform(-1.0, 1.0, size=(batch, lookback))
        weights = rng.standard_normal(batch)
        mask = None
        if dropout > 0:
            mask = (rng.random((batch, hidden)) >= dropout) / (1.0 - dropout)
        ana = analytic_gradient(net, windows, weights, mask)
        num = numeric_gradient(net, windows, weights, mask)
        for name in net.params:
            a, n = ana[name], num[name]
            worst_rel = max(worst_rel, relative_error(a, n))
            excess = np.abs(a - n) - (tol * np.maximum(np.abs(a), np.abs(n)) + abs_floor)
            worst_excess = max(worst_excess, float(excess.max()))
    return GradCheck(kind.value, trials, worst_rel, worst_excess)
