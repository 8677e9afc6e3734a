import pytest

from pricecast.config import ConfigError, PipelineConfig, example_config


def test_yaml_round_trip():
    cfg = example_config("oil")
    back = PipelineConfig.from_yaml(cfg.to_yaml())
    assert back == cfg
    assert back.neural.dropout == 0.001
    assert example_config("cotton").neural.dropout == 0.3


def test_defaults_cover_every_setting():
    doc = example_config().to_dict()
    assert set(doc) >= {"commodity", "split_ratio", "seed", "parallel", "neural", "grid",
                        "arima", "unitroot", "combine"}
    assert doc["neural"]["units"] == 170 and doc["neural"]["lookback"] == 2
    assert doc["unitroot"]["reps"] == 5000
    assert doc["grid"]["lookback"] == [2, 4, 6, 8, 10]


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown config keys: colour"):
        PipelineConfig.from_dict({"colour": 1})
    with pytest.raises(ConfigError, match="unknown keys in neural: layers"):
        PipelineConfig.from_dict({"neural": {"layers": 2}})


@pytest.mark.parametrize("patch, msg", [
    ({"split_ratio": 1.0}, "split_ratio"),
    ({"parallel": 0}, "parallel"),
    ({"neural": {"kind": "cnn"}}, "cell kind"),
    ({"neural": {"dropout": 1.0}}, "dropout"),
    ({"neural": {"epochs": 0}}, "epochs"),
    ({"unitroot": {"variant": "x"}}, "variant"),
    ({"unitroot": {"reps": 5}}, "reps"),
    ({"arima": {"p_max": 13}}, "p_max"),
    ({"combine": {"schemes": ["median"]}}, "median"),
    ({"combine": {"holdout": 1.5}}, "holdout"),
])
def test_validation_messages(patch, msg):
    with pytest.raises(ConfigError, match=msg):
        PipelineConfig.from_dict(patch).validate()


def test_load_from_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("commodity: oil\nseed: 11\nneural:\n  units: 5\n")
    cfg = PipelineConfig.load(path).validate()
    assert (cfg.commodity, cfg.seed, cfg.neural.units, cfg.column_name) == ("oil", 11, 5, "oil")
