"""Recurrent cells: forward step and the matching backward step.

All arrays are batched row-major: inputs ``x`` are ``(batch, input_size)``,
states ``(batch, hidden)``. Gate matrices act on the concatenation
``[state, x]`` and have shape ``(hidden, hidden + input_size)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class CellKind(str, enum.Enum):
    RNN = "rnn"
    GRU_SIMPLE = "gru_simple"
    GRU_FULL = "gru_full"
    LSTM = "lstm"

    @classmethod
    def parse(cls, value) -> "CellKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown cell kind {value!r}; expected one of {names}") from None


GATES = {
    CellKind.RNN: (),
    CellKind.GRU_SIMPLE: ("c", "u"),
    CellKind.GRU_FULL: ("c", "u", "r"),
    CellKind.LSTM: ("c", "u", "f", "o"),
}


def param_shapes(kind: CellKind, hidden: int, input_size: int) -> dict[str, tuple[int, ...]]:
    """Shapes of every trainable array, including the linear output head."""
    kind = CellKind.parse(kind)
    if kind is CellKind.RNN:
        shapes = {
            "W_aa": (hidden, hidden),
            "W_ax": (hidden, input_size),
            "b_a": (hidden,),
        }
    else:
        shapes = {}
        for g in GATES[kind]:
            shapes[f"W_{g}"] = (hidden, hidden + input_size)
            shapes[f"b_{g}"] = (hidden,)
    shapes["W_ya"] = (1, hidden)
    shapes["b_y"] = (1,)
    return shapes


def glorot_bound(shape: tuple[int, ...]) -> float:
    """Half-width of the scaled-uniform init, ``sqrt(6 / (fan_in + fan_out))``."""
    fan_out, fan_in = shape
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(kind, hidden: int, input_size: int, rng: np.random.Generator) -> dict:
    params = {}
    for name, shape in param_shapes(kind, hidden, input_size).items():
        if name.startswith("b_"):
            params[name] = np.zeros(shape)
        else:
            bound = glorot_bound(shape)
            params[name] = rng.uniform(-bound, bound, size=shape)
    return params


def sigmoid(z):
    # split on sign so neither branch overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class CellState:
    """Activation ``a`` and memory cell ``c``; GRU cells keep ``a is c``."""

    a: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, batch: int, hidden: int) -> "CellState":
        a = np.zeros((batch, hidden))
        return cls(a, np.zeros((batch, hidden)))


def _check(x_t, state, W, hidden, name):
    if x_t.ndim != 2 or state.a.shape != (x_t.shape[0], hidden):
        raise ValueError(f"{name}: state shape {state.a.shape} does not match batch {x_t.shape}")
    if W.shape[1] != hidden + x_t.shape[1]:
        raise ValueError(
            f"{name}: weights expect input size {W.shape[1] - hidden}, got {x_t.shape[1]}"
        )


def rnn_cell_forward(x_t, state: CellState, params):
    """``a = tanh(W_aa a_prev + W_ax x + b_a)``; ``y = W_ya a + b_y`` (linear)."""
    W_aa, W_ax = params["W_aa"], params["W_ax"]
    hidden = W_aa.shape[0]
    if state.a.shape[-1] != hidden or x_t.shape[-1] != W_ax.shape[1]:
        raise ValueError("rnn_cell_forward: dimension mismatch")
    a = np.tanh(state.a @ W_aa.T + x_t @ W_ax.T + params["b_a"])
    y = a @ params["W_ya"].T + params["b_y"]
    cache = {"x": x_t, "a_prev": state.a, "a": a}
    return CellState(a, a), y, cache


def gru_cell_forward(x_t, state: CellState, params, variant: str = "simple"):
    """One GRU step on memory ``c``.

    ``simple`` uses the candidate ``tanh(W_c [c_prev, x] + b_c)``;
    ``full`` scales ``c_prev`` by the relevance gate before the candidate.
    """
    c_prev = state.c
    hidden = params["W_u"].shape[0]
    _check(x_t, state, params["W_u"], hidden, "gru_cell_forward")
    h = np.concatenate([c_prev, x_t], axis=1)
    gamma_u = sigmoid(h @ params["W_u"].T + params["b_u"])
    cache = {"x": x_t, "c_prev": c_prev, "h": h, "gamma_u": gamma_u}
    if variant == "simple":
        hc = h
    elif variant == "full":
        gamma_r = sigmoid(h @ params["W_r"].T + params["b_r"])
        hc = np.concatenate([gamma_r * c_prev, x_t], axis=1)
        cache["gamma_r"] = gamma_r
    else:
        raise ValueError(f"unknown GRU variant {variant!r}")
    c_tilde = np.tanh(hc @ params["W_c"].T + params["b_c"])
    c = gamma_u * c_tilde + (1.0 - gamma_u) * c_prev
    cache.update(hc=hc, c_tilde=c_tilde, c=c)
    return CellState(c, c), cache


def lstm_cell_forward(x_t, state: CellState, params):
    hidden = params["W_c"].shape[0]
    _check(x_t, state, params["W_c"], hidden, "lstm_cell_forward")
    h = np.concatenate([state.a, x_t], axis=1)
    c_tilde = np.tanh(h @ params["W_c"].T + params["b_c"])
    gamma_u = sigmoid(h @ params["W_u"].T + params["b_u"])
    gamma_f = sigmoid(h @ params["W_f"].T + params["b_f"])
    gamma_o = sigmoid(h @ params["W_o"].T + params["b_o"])
    c = gamma_u * c_tilde + gamma_f * state.c
    tanh_c = np.tanh(c)
    a = gamma_o * tanh_c
    cache = {
        "x": x_t, "h": h, "c_prev": state.c, "c_tilde": c_tilde,
        "gamma_u": gamma_u, "gamma_f": gamma_f, "gamma_o": gamma_o,
        "c": c, "tanh_c": tanh_c, "a": a,
    }
    return CellState(a, c), cache


def cell_forward(kind: CellKind, x_t, state, params):
    """Dispatch one step; returns ``(new_state, cache)``."""
    if kind is CellKind.RNN:
        # the head is applied once after the unroll, not per step
        W_aa = params["W_aa"]
        a = np.tanh(state.a @ W_aa.T + x_t @ params["W_ax"].T + params["b_a"])
        return CellState(a, a), {"x": x_t, "a_prev": state.a, "a": a}
    if kind is CellKind.GRU_SIMPLE:
        return gru_cell_forward(x_t, state, params, "simple")
    if kind is CellKind.GRU_FULL:
        return gru_cell_forward(x_t, state, params, "full")
    if kind is CellKind.LSTM:
        return lstm_cell_forward(x_t, state, params)
    raise ValueError(f"unhandled cell kind {kind!r}")


def _acc(grads, name, value):
    grads[name] += value


def cell_backward(kind: CellKind, da, dc, cache, params, grads):
    """Backpropagate one step.

    ``da`` and ``dc`` are the loss gradients w.r.t. this step's activation and
    memory cell. Parameter gradients are added into ``grads``; returns the
    gradients w.r.t. the previous ``(a, c)``.
    """
    if kind is CellKind.RNN:
        a = cache["a"]
        dz = da * (1.0 - a * a)
        _acc(grads, "W_aa", dz.T @ cache["a_prev"])
        _acc(grads, "W_ax", dz.T @ cache["x"])
        _acc(grads, "b_a", dz.sum(axis=0))
        da_prev = dz @ params["W_aa"]
        return da_prev, np.zeros_like(da_prev)

    if kind in (CellKind.GRU_SIMPLE, CellKind.GRU_FULL):
        # a and c are the same vector
        dc = dc + da
        hidden = dc.shape[1]
        gamma_u, c_tilde, c_prev = cache["gamma_u"], cache["c_tilde"], cache["c_prev"]
        dzc = dc * gamma_u * (1.0 - c_tilde * c_tilde)
        dzu = dc * (c_tilde - c_prev) * gamma_u * (1.0 - gamma_u)
        dc_prev = dc * (1.0 - gamma_u)
        _acc(grads, "W_c", dzc.T @ cache["hc"])
        _acc(grads, "b_c", dzc.sum(axis=0))
        _acc(grads, "W_u", dzu.T @ cache["h"])
        _acc(grads, "b_u", dzu.sum(axis=0))
        dh = dzu @ params["W_u"]
        dhc = dzc @ params["W_c"]
        if kind is CellKind.GRU_FULL:
            gamma_r = cache["gamma_r"]
            d_gated = dhc[:, :hidden]
            dc_prev = dc_prev + d_gated * gamma_r
            dzr = d_gated * c_prev * gamma_r * (1.0 - gamma_r)
            _acc(grads, "W_r", dzr.T @ cache["h"])
            _acc(grads, "b_r", dzr.sum(axis=0))
            dh = dh + dzr @ params["W_r"]
        else:
            dh = dh + dhc
        dc_prev = dc_prev + dh[:, :hidden]
        return np.zeros_like(dc_prev), dc_prev

    if kind is CellKind.LSTM:
        hidden = da.shape[1]
        gamma_u, gamma_f, gamma_o = cache["gamma_u"], cache["gamma_f"], cache["gamma_o"]
        c_tilde, tanh_c = cache["c_tilde"], cache["tanh_c"]
        dc = dc + da * gamma_o * (1.0 - tanh_c * tanh_c)
        dzo = da * tanh_c * gamma_o * (1.0 - gamma_o)
        dzc = dc * gamma_u * (1.0 - c_tilde * c_tilde)
        dzu = dc * c_tilde * gamma_u * (1.0 - gamma_u)
        dzf = dc * cache["c_prev"] * gamma_f * (1.0 - gamma_f)
        h = cache["h"]
        dh = 0.0
        for g, dz in (("c", dzc), ("u", dzu), ("f", dzf), ("o", dzo)):
            _acc(grads, f"W_{g}", dz.T @ h)
            _acc(grads, f"b_{g}", dz.sum(axis=0))
            dh = dh + dz @ params[f"W_{g}"]
        return dh[:, :hidden], dc * gamma_f

    raise ValueError(f"unhandled cell kind {kind!r}")
