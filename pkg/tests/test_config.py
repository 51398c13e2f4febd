import json

import pytest

from fogrnn.config import DATA_DIR_ENV, ConfigError, config_from_dict, load_config


def test_defaults():
    c = config_from_dict({"seed": 3, "data": {"synthetic": {}}})
    assert c.window.length_samples == 256 and c.window.stride_samples == 32
    assert c.smote.k_neighbors == 5 and c.smote.seed == 3
    assert c.model.hidden1 == 64 and c.model.seed == 3
    assert c.synthetic["patients"] == 10 and c.synthetic["seed"] == 3
    assert c.experiment_id == "frequency_all"


@pytest.mark.parametrize(
    "raw, where",
    [
        ({"seed": 1, "data": {"synthetic": {}}, "features": {"group": "wavelet"}}, "features/group"),
        ({"data": {"synthetic": {}}}, "<root>"),
        ({"seed": 1, "data": {"synthetic": {}}, "model": {"epochs": 0}}, "model/epochs"),
        ({"seed": 1, "data": {"synthetic": {}}, "bogus": 1}, "<root>"),
        ({"seed": 1, "data": {"synthetic": {}}, "features": {"sensors": ["wrist"]}}, "features/sensors"),
    ],
)
def test_invalid(raw, where):
    with pytest.raises(ConfigError, match=where):
        config_from_dict(raw)


def test_data_source(monkeypatch):
    monkeypatch.delenv(DATA_DIR_ENV, raising=False)
    with pytest.raises(ConfigError, match=DATA_DIR_ENV):
        config_from_dict({"seed": 1})
    monkeypatch.setenv(DATA_DIR_ENV, "/data")
    assert config_from_dict({"seed": 1}).data_path == "/data"
    with pytest.raises(ConfigError, match="either"):
        config_from_dict({"seed": 1, "data": {"path": "a", "synthetic": {}}})


def test_overrides_and_replace(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"seed": 1, "data": {"synthetic": {}}}))
    c = load_config(p, {"model.epochs": 4, "features.sensors": ["trunk"]})
    assert c.model.epochs == 4 and c.experiment_id == "frequency_trunk"
    d = c.replace(**{"split.mode": "subject_dependent"})
    assert d.split.mode == "subject_dependent" and d.model.epochs == 4
    assert config_from_dict(c.to_dict()).to_dict() == c.to_dict()


def test_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{seed")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(p)


def test_sensor_order_normalized():
    c = config_from_dict({"seed": 1, "data": {"synthetic": {}}, "features": {"sensors": ["trunk", "ankle"]}})
    assert c.sensors == ("ankle", "trunk")
    c = config_from_dict({"seed": 1, "data": {"synthetic": {}}, "features": {"sensors": ["trunk", "ankle", "thigh"]}})
    assert c.sensors == "all"
