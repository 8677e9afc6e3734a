"""One-layer recurrent network with a linear output head."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .. import rng as rngmod
from .cells import CellKind, CellState, cell_backward, cell_forward, init_params, param_shapes

FORMAT_VERSION = "pricecast-rnn/1"


@dataclass
class RecurrentNetwork:
    kind: CellKind
    params: dict
    hidden_units: int
    lookback: int
    input_size: int = 1
    dropout: float = 0.0
    seed: int = rngmod.DEFAULT_SEED

    def __post_init__(self):
        self.kind = CellKind.parse(self.kind)
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        expected = param_shapes(self.kind, self.hidden_units, self.input_size)
        if set(expected) != set(self.params):
            raise ValueError(f"parameter names {sorted(self.params)} do not match {self.kind.value}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(f"{name} has shape {self.params[name].shape}, expected {shape}")

    def copy(self) -> "RecurrentNetwork":
        return RecurrentNetwork(
            self.kind, {k: v.copy() for k, v in self.params.items()},
            self.hidden_units, self.lookback, self.input_size, self.dropout, self.seed,
        )

    def n_params(self) -> int:
        return sum(v.size for v in self.params.values())


def init_network(kind, hidden_units: int, input_size: int = 1, lookback: int = 1,
                 dropout: float = 0.0, seed: int = rngmod.DEFAULT_SEED) -> RecurrentNetwork:
    """Fresh network: scaled-uniform weights, zero biases, fixed by ``seed``."""
    if hidden_units < 1:
        raise ValueError("hidden_units must be at least 1")
    if lookback < 1:
        raise ValueError("lookback must be at least 1")
    kind = CellKind.parse(kind)
    params = init_params(kind, hidden_units, input_size, rngmod.stream(seed, rngmod.INIT))
    return RecurrentNetwork(kind, params, hidden_units, lookback, input_size, dropout, seed)


@dataclass
class ForwardCache:
    steps: list
    a_final: np.ndarray
    head_input: np.ndarray
    mask: np.ndarray | None = field(default=None)


def apply_dropout(activations, rate: float, rng: np.random.Generator | None = None,
                  training: bool = True):
    """Inverted dropout; returns ``(output, mask)``.

    Each unit is zeroed with probability ``rate`` and survivors are scaled by
    ``1 / (1 - rate)``. With ``training=False`` or ``rate == 0`` the input is
    returned unchanged and the mask is ``None``.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return activations, None
    if rng is None:
        raise ValueError("training-mode dropout needs a generator")
    mask = (rng.random(activations.shape) >= rate) / (1.0 - rate)
    return activations * mask, mask


def _as_batch(net: RecurrentNetwork, windows) -> np.ndarray:
    x = np.asarray(windows, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim == 3:
        # (batch, stride, lookback) as produced by WindowedDataset.as_3d
        x = x.reshape(x.shape[0], -1)
    if x.ndim != 2 or x.shape[1] != net.lookback * net.input_size:
        raise ValueError(
            f"window length {x.shape[-1]} does not match lookback {net.lookback}"
        )
    return x.reshape(x.shape[0], net.lookback, net.input_size)


def forward(net: RecurrentNetwork, windows, dropout_rng: np.random.Generator | None = None):
    """Unroll the cell over each window and apply the head.

    ``windows`` is ``(batch, lookback)`` or a single window. Dropout on the
    final activation is applied only when ``dropout_rng`` is given.
    Returns ``(predictions, cache)`` with ``predictions`` of shape ``(batch,)``.
    """
    x = _as_batch(net, windows)
    batch = x.shape[0]
    state = CellState.zeros(batch, net.hidden_units)
    steps = []
    for t in range(net.lookback):
        state, cache = cell_forward(net.kind, x[:, t, :], state, net.params)
        steps.append(cache)
    head_in, mask = apply_dropout(state.a, net.dropout, dropout_rng,
                                  training=dropout_rng is not None)
    pred = (head_in @ net.params["W_ya"].T + net.params["b_y"])[:, 0]
    return pred, ForwardCache(steps, state.a, head_in, mask)


def backward(net: RecurrentNetwork, cache: ForwardCache, d_pred) -> dict:
    """Gradients of ``sum(d_pred * pred)`` for every parameter (BPTT)."""
    d_pred = np.asarray(d_pred, dtype=np.float64).reshape(-1)
    if d_pred.shape[0] != cache.a_final.shape[0] or len(cache.steps) != net.lookback:
        raise ValueError("cache does not match this network / upstream gradient")
    grads = {k: np.zeros_like(v) for k, v in net.params.items()}
    dy = d_pred[:, None]
    grads["W_ya"] += dy.T @ cache.head_input
    grads["b_y"] += dy.sum(axis=0)
    da = dy @ net.params["W_ya"]
    if cache.mask is not None:
        da = da * cache.mask
    dc = np.zeros_like(da)
    for step in reversed(cache.steps):
        da, dc = cell_backward(net.kind, da, dc, step, net.params, grads)
    return grads


def predict(net: RecurrentNetwork, windows, batch_size: int = 4096) -> np.ndarray:
    """Inference-mode predictions (dropout off), one per window."""
    x = np.asarray(windows, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim == 3:
        x = x.reshape(x.shape[0], -1)
    if x.shape[-1] != net.lookback:
        raise ValueError(f"window length {x.shape[-1]} does not match lookback {net.lookback}")
    out = [forward(net, x[i:i + batch_size])[0] for i in range(0, len(x), batch_size)]
    return np.concatenate(out) if out else np.zeros(0)


def save_network(net: RecurrentNetwork, path) -> None:
    """Write the network as versioned JSON; floats round-trip exactly."""
    doc = network_to_dict(net)
    from ..io import write_text_atomic

    write_text_atomic(path, json.dumps(doc, indent=1) + "\n")


def network_to_dict(net: RecurrentNetwork) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": net.kind.value,
        "hidden_units": net.hidden_units,
        "input_size": net.input_size,
        "lookback": net.lookback,
        "dropout": net.dropout,
        "seed": net.seed,
        "params": {
            name: {"shape": list(v.shape), "values": [float(x) for x in v.ravel()]}
            for name, v in net.params.items()
        },
    }


def network_from_dict(doc: dict) -> RecurrentNetwork:
    if doc.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    params = {
        name: np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in doc["params"].items()
    }
    return RecurrentNetwork(
        CellKind.parse(doc["kind"]), params, int(doc["hidden_units"]), int(doc["lookback"]),
        int(doc["input_size"]), float(doc["dropout"]), int(doc["seed"]),
    )


def load_network(path) -> RecurrentNetwork:
    with open(path, encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))
