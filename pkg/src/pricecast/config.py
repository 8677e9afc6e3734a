"""Pipeline configuration: one YAML document, validated up front."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import yaml

from .combine import SCHEMES
from .neural.cells import CellKind
from .neural.gridsearch import GridSpec
from .neural.training import TrainConfig
from .unitroot import BreakSpec


class ConfigError(ValueError):
    pass


@dataclass
class NeuralSection:
    kind: str = "lstm"
    units: int = 170
    lookback: int = 2
    dropout: float = 0.3
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float | None = 5.0
    weight_decay: float = 0.0
    shuffle: bool = True


@dataclass
class GridSection:
    dropout: list = field(default_factory=lambda: [0.001, 0.01, 0.03, 0.1, 0.3])
    units: list = field(default_factory=lambda: [10, 50, 90, 130, 170])
    epochs: list = field(default_factory=lambda: [20, 40, 60, 80, 100])
    lookback: list = field(default_factory=lambda: [2, 4, 6, 8, 10])


@dataclass
class ArimaSection:
    p_max: int = 6
    q_max: int = 6
    refit: bool = False
    acf_lags: int = 30
    maxiter: int = 500
    gtol: float = 1e-8


@dataclass
class UnitRootSection:
    variant: str = "both_breaks"
    trimming: float = 0.15
    lag_max: int | None = None
    lag_rule: str = "sic"
    reps: int = 5000
    level: float = 0.05


@dataclass
class CombineSection:
    schemes: list = field(default_factory=lambda: list(SCHEMES))
    rank_rule: str = "inverse"
    # share of the evaluation period used to fit weights; None = same window
    holdout: float | None = None


@dataclass
class PipelineConfig:
    commodity: str = "cotton"
    data: str | None = None
    column: str | None = None
    split_ratio: float = 0.7
    scaler: str = "train"
    seed: int = 3
    parallel: int = 1
    out: str = "runs/cotton"
    neural: NeuralSection = field(default_factory=NeuralSection)
    grid: GridSection = field(default_factory=GridSection)
    arima: ArimaSection = field(default_factory=ArimaSection)
    unitroot: UnitRootSection = field(default_factory=UnitRootSection)
    combine: CombineSection = field(default_factory=CombineSection)

    @property
    def column_name(self) -> str:
        return self.column or self.commodity

    def train_config(self) -> TrainConfig:
        n = self.neural
        return TrainConfig(
            epochs=n.epochs, batch_size=n.batch_size, shuffle=n.shuffle, seed=self.seed,
            learning_rate=n.learning_rate, beta1=n.beta1, beta2=n.beta2, epsilon=n.epsilon,
            clip_norm=n.clip_norm, weight_decay=n.weight_decay,
        )

    def grid_spec(self) -> GridSpec:
        g = self.grid
        return GridSpec(tuple(g.dropout), tuple(g.units), tuple(g.epochs), tuple(g.lookback))

    def break_spec(self) -> BreakSpec:
        u = self.unitroot
        return BreakSpec(u.variant, u.trimming, u.lag_max, u.lag_rule)

    def validate(self) -> "PipelineConfig":
        """Check every field against the module preconditions; raise ConfigError."""
        try:
            if not 0.0 < self.split_ratio < 1.0:
                raise ValueError("split_ratio must lie in (0, 1)")
            if self.scaler not in ("train", "full"):
                raise ValueError("scaler must be 'train' or 'full'")
            if self.seed < 0:
                raise ValueError("seed must be nonnegative")
            if self.parallel < 1:
                raise ValueError("parallel must be at least 1")
            CellKind.parse(self.neural.kind)
            if self.neural.units < 1 or self.neural.lookback < 1:
                raise ValueError("neural.units and neural.lookback must be positive")
            if not 0.0 <= self.neural.dropout < 1.0:
                raise ValueError("neural.dropout must lie in [0, 1)")
            self.train_config()
            self.grid_spec()
            if not (0 <= self.arima.p_max <= 12 and 0 <= self.arima.q_max <= 12):
                raise ValueError("arima.p_max and arima.q_max must lie in 0..12")
            self.break_spec()
            if self.unitroot.reps < 100:
                raise ValueError("unitroot.reps must be at least 100")
            if not 0.0 < self.unitroot.level < 1.0:
                raise ValueError("unitroot.level must lie in (0, 1)")
            for s in self.combine.schemes:
                if s not in SCHEMES:
                    raise ValueError(f"unknown combination scheme {s!r}")
            if self.combine.rank_rule not in ("inverse", "proportional"):
                raise ValueError("combine.rank_rule must be 'inverse' or 'proportional'")
            h = self.combine.holdout
            if h is not None and not 0.0 < h < 1.0:
                raise ValueError("combine.holdout must lie in (0, 1) or be null")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def from_dict(cls, doc: dict | None) -> "PipelineConfig":
        doc = dict(doc or {})
        sections = {"neural": NeuralSection, "grid": GridSection, "arima": ArimaSection,
                    "unitroot": UnitRootSection, "combine": CombineSection}
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        for key, value in doc.items():
            if key in sections:
                sec = sections[key]
                sub_known = {f.name for f in fields(sec)}
                bad = set(value or {}) - sub_known
                if bad:
                    raise ConfigError(f"unknown keys in {key}: {', '.join(sorted(bad))}")
                kwargs[key] = sec(**(value or {}))
            else:
                kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def from_yaml(cls, text: str) -> "PipelineConfig":
        return cls.from_dict(yaml.safe_load(text))

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_yaml(fh.read())


def example_config(commodity: str = "cotton") -> PipelineConfig:
    """Canonical starting point; mirrors the tuned settings reported for each commodity."""
    cfg = PipelineConfig(commodity=commodity, out=f"runs/{commodity}")
    if commodity == "oil":
        cfg.neural.dropout = 0.001
    return cfg
