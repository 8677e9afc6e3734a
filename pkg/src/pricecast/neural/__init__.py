"""Recurrent forecasters written directly in NumPy."""
from .cells import (CellKind, CellState, gru_cell_forward, lstm_cell_forward,
                    rnn_cell_forward)
from .gridsearch import DEFAULT_GRID, GridResult, GridSpec, TrialResult, grid_search
from .network import (RecurrentNetwork, apply_dropout, backward, forward, init_network,
                      load_network, predict, save_network)
from .optim import AdamState, adam_step, clip_global_norm
from .training import TrainConfig, TrainingDiverged, train

__all__ = [
    "CellKind", "CellState", "rnn_cell_forward", "gru_cell_forward", "lstm_cell_forward",
    "RecurrentNetwork", "init_network", "forward", "backward", "predict", "apply_dropout",
    "save_network", "load_network", "AdamState", "adam_step", "clip_global_norm",
    "TrainConfig", "TrainingDiverged", "train",
    "GridSpec", "GridResult", "TrialResult", "grid_search", "DEFAULT_GRID",
]
