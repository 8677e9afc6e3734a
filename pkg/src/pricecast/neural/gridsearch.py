"""Exhaustive hyperparameter sweep scored on test-set RMSE."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..data import make_windows
from ..parallel import parallel_map
from .network import init_network, predict
from .training import TrainConfig, TrainingDiverged, train

# value lists of the published LSTM sweep
DEFAULT_GRID = {
    "dropout": [0.001, 0.01, 0.03, 0.1, 0.3],
    "units": [10, 50, 90, 130, 170],
    "epochs": [20, 40, 60, 80, 100],
    "lookback": [2, 4, 6, 8, 10],
}


@dataclass(frozen=True)
class GridSpec:
    dropout: tuple = (0.1,)
    units: tuple = (50,)
    epochs: tuple = (50,)
    lookback: tuple = (2,)

    def __post_init__(self):
        for name in ("dropout", "units", "epochs", "lookback"):
            vals = tuple(getattr(self, name))
            object.__setattr__(self, name, vals)
            if not vals:
                raise ValueError(f"grid list {name!r} is empty")
        if any(not 0.0 <= d < 1.0 for d in self.dropout):
            raise ValueError("dropout values must lie in [0, 1)")
        for name in ("units", "epochs", "lookback"):
            if any(int(v) != v or v < 1 for v in getattr(self, name)):
                raise ValueError(f"{name} values must be positive integers")

    @classmethod
    def default(cls) -> "GridSpec":
        return cls(**{k: tuple(v) for k, v in DEFAULT_GRID.items()})

    def points(self):
        """Cartesian product in listed order: dropout, units, epochs, lookback."""
        return list(itertools.product(self.dropout, self.units, self.epochs, self.lookback))

    def __len__(self) -> int:
        return len(self.dropout) * len(self.units) * len(self.epochs) * len(self.lookback)


@dataclass
class TrialResult:
    index: int
    dropout: float
    units: int
    epochs: int
    lookback: int
    train_rmse: float = math.nan
    test_rmse: float = math.nan
    wall_time_s: float = 0.0
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error and math.isfinite(self.test_rmse)

    def rank_key(self):
        return (self.test_rmse, self.units, self.lookback, self.epochs, self.index)


@dataclass
class GridResult:
    table: list  # sorted: successful trials by rank_key, failures last
    best: TrialResult | None
    kind: str
    base: TrainConfig = field(default_factory=TrainConfig)


def _run_group(args):
    kind, dropout, units, lookback, epoch_list, indices, train_scaled, test_scaled, cfg = args
    rows = {e: TrialResult(i, dropout, units, e, lookback) for e, i in zip(epoch_list, indices)}
    t0 = time.perf_counter()
    try:
        tr = make_windows(train_scaled, lookback)
        te = make_windows(test_scaled, lookback)
    except ValueError as exc:
        for r in rows.values():
            r.error = str(exc)
        return list(rows.values())
    targets = set(epoch_list)

    def snapshot(epoch, net, loss):
        if epoch in targets:
            r = rows[epoch]
            r.train_rmse = loss
            pred = predict(net, te.features)
            r.test_rmse = float(np.sqrt(np.mean((pred - te.labels) ** 2)))
            r.wall_time_s = time.perf_counter() - t0

    net = init_network(kind, units, 1, lookback, dropout, seed=cfg.seed)
    try:
        train(net, tr, replace(cfg, epochs=max(epoch_list)), on_epoch=snapshot)
    except TrainingDiverged as exc:
        for r in rows.values():
            if not math.isfinite(r.test_rmse):
                r.error = str(exc)
    return list(rows.values())


def grid_search(kind, grid: GridSpec, train_scaled, test_scaled,
                cfg_base: TrainConfig | None = None, n_jobs: int = 1) -> GridResult:
    """Train one network per grid point and rank them by test RMSE (scaled).

    Every trial uses ``cfg_base.seed`` for initialisation, shuffling and
    dropout, so a trial's outcome does not depend on which worker ran it or
    in which order. Trials that differ only in epoch count share one
    training run and are read off at the matching epoch, which is exactly
    what separate runs with the same seed would produce.

    Ties in test RMSE go to fewer units, then smaller lookback, then fewer
    epochs, then listed order. Failed trials stay in the table with their
    error and are never chosen.
    """
    cfg = cfg_base or TrainConfig()
    points = grid.points()
    groups = {}
    for idx, (dropout, units, epochs, lookback) in enumerate(points):
        groups.setdefault((dropout, units, lookback), []).append((epochs, idx))
    jobs = []
    for (dropout, units, lookback), members in groups.items():
        members.sort()
        jobs.append((kind, dropout, units, lookback, [e for e, _ in members],
                     [i for _, i in members], np.asarray(train_scaled), np.asarray(test_scaled), cfg))
    results = [r for group in parallel_map(_run_group, jobs, n_jobs) for r in group]
    results.sort(key=lambda r: r.index)
    ok = sorted((r for r in results if r.ok), key=TrialResult.rank_key)
    failed = [r for r in results if not r.ok]
    return GridResult(ok + failed, ok[0] if ok else None, str(getattr(kind, "value", kind)), cfg)


TABLE_HEADER = ["rank", "trial", "dropout", "units", "epochs", "lookback",
                "train_rmse", "test_rmse", "wall_time_s", "error"]


def table_rows(result: GridResult, timing: bool = True):
    for rank, r in enumerate(result.table, start=1):
        yield [rank if r.ok else "", r.index, r.dropout, r.units, r.epochs, r.lookback,
               r.train_rmse, r.test_rmse, round(r.wall_time_s, 3) if timing else "", r.error]
