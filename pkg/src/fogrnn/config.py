"""Experiment configuration: JSON schema, defaults and resolution."""

from __future__ import annotations

import copy
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema

from .balance import SmoteSpec
from .eval.split import SplitPlan
from .features import GROUPS
from .ingest import SENSORS
from .model.lstm import LstmHyper
from .windowing import LABEL_RULES, WindowSpec

DATA_DIR_ENV = "FOGRNN_DATA_DIR"
RFE_GROUP = "rfe25"

_pos_int = {"type": "integer", "minimum": 1}
_patients = {"type": "array", "items": {"type": "integer"}, "uniqueItems": True}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["seed"],
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": "string"},
                "synthetic": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "patients": _pos_int,
                        "duration_s": {"type": "number", "exclusiveMinimum": 0},
                        "n_freezes": _pos_int,
                        "noise": {"type": "number", "minimum": 0},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "window": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "length_samples": _pos_int,
                "stride_samples": _pos_int,
                "label_rule": {"enum": list(LABEL_RULES)},
            },
        },
        "features": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "group": {"enum": [*GROUPS, RFE_GROUP]},
                "sensors": {
                    "oneOf": [
                        {"const": "all"},
                        {"type": "array", "items": {"enum": list(SENSORS)}, "minItems": 1, "uniqueItems": True},
                    ]
                },
                "rfe_k": _pos_int,
            },
        },
        "smote": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_neighbors": _pos_int,
                "target_ratio": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "hidden1": _pos_int,
                "hidden2": _pos_int,
                "seq_len": _pos_int,
                "batch_size": _pos_int,
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "epochs": _pos_int,
                "patience": _pos_int,
                "min_delta": {"type": "number", "minimum": 0},
                "grad_clip": {"type": "number", "minimum": 0},
            },
        },
        "split": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["subject_independent", "subject_dependent"]},
                "train_patients": _patients,
                "test_patients": _patients,
                "train_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "chronological": {"type": "boolean"},
            },
        },
        "baseline": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"channel": {"type": "string", "pattern": "^(ankle|thigh|trunk)_(x|y|z|mag)$"}},
        },
        "output_dir": {"type": "string"},
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    seed: int
    data_path: str | None = None
    synthetic: dict | None = None
    window: WindowSpec = field(default_factory=WindowSpec)
    feature_group: str = "frequency"
    sensors: object = "all"
    rfe_k: int = 25
    smote: SmoteSpec = field(default_factory=SmoteSpec)
    model: LstmHyper = field(default_factory=LstmHyper)
    split: SplitPlan = field(default_factory=SplitPlan)
    baseline_channel: str = "ankle_x"
    output_dir: str = "runs"

    @property
    def experiment_id(self):
        if self.feature_group == RFE_GROUP:
            return RFE_GROUP
        sensors = "all" if self.sensors == "all" else "+".join(self.sensors)
        return f"{self.feature_group}_{sensors}"

    def to_dict(self):
        """Resolved config in the same shape as the JSON input."""
        d = {"seed": self.seed, "data": {}}
        if self.data_path is not None:
            d["data"]["path"] = self.data_path
        if self.synthetic is not None:
            d["data"]["synthetic"] = dict(self.synthetic)
        d["window"] = asdict(self.window)
        d["features"] = {
            "group": self.feature_group,
            "sensors": self.sensors if self.sensors == "all" else list(self.sensors),
            "rfe_k": self.rfe_k,
        }
        d["smote"] = {"k_neighbors": self.smote.k_neighbors, "target_ratio": self.smote.target_ratio}
        hyper = asdict(self.model)
        d["model"] = {k: hyper[k] for k in SCHEMA["properties"]["model"]["properties"]}
        d["split"] = {
            "mode": self.split.mode,
            "train_patients": list(self.split.train_patients),
            "test_patients": list(self.split.test_patients),
            "train_fraction": self.split.train_fraction,
            "chronological": self.split.chronological,
        }
        d["baseline"] = {"channel": self.baseline_channel}
        d["output_dir"] = self.output_dir
        return d

    def replace(self, **changes):
        d = self.to_dict()
        for dotted, value in changes.items():
            _set_dotted(d, dotted, value)
        return config_from_dict(d)


def _set_dotted(d, dotted, value):
    keys = dotted.split(".")
    for k in keys[:-1]:
        d = d.setdefault(k, {})
    d[keys[-1]] = value


def validate(raw):
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {e.message}") from None


def config_from_dict(raw, overrides=None):
    """Validate ``raw`` (after applying dotted-key ``overrides``) and resolve defaults."""
    raw = copy.deepcopy(raw)
    for k, v in (overrides or {}).items():
        _set_dotted(raw, k, v)
    validate(raw)
    seed = raw["seed"]
    data = raw.get("data", {})
    path = data.get("path")
    synthetic = data.get("synthetic")
    if path is None and synthetic is None:
        path = os.environ.get(DATA_DIR_ENV)
        if path is None:
            raise ConfigError(f"config names no data source and {DATA_DIR_ENV} is unset")
    if path is not None and synthetic is not None:
        raise ConfigError("choose either data.path or data.synthetic, not both")
    if synthetic is not None:
        synthetic = {"patients": 10, "duration_s": 240.0, "n_freezes": 4, "noise": 30.0, "seed": seed, **synthetic}
    try:
        window = WindowSpec(**raw.get("window", {}))
        feats = raw.get("features", {})
        smote = SmoteSpec(seed=seed, **raw.get("smote", {}))
        model = LstmHyper(seed=seed, **raw.get("model", {}))
        sp = dict(raw.get("split", {}))
        for key in ("train_patients", "test_patients"):
            if key in sp:
                sp[key] = tuple(sp[key])
        split = SplitPlan(seed=seed, **sp)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    sensors = feats.get("sensors", "all")
    if sensors != "all":
        sensors = tuple(s for s in SENSORS if s in sensors)
        if set(sensors) == set(SENSORS):
            sensors = "all"
    return ExperimentConfig(
        seed=seed,
        data_path=path,
        synthetic=synthetic,
        window=window,
        feature_group=feats.get("group", "frequency"),
        sensors=sensors,
        rfe_k=feats.get("rfe_k", 25),
        smote=smote,
        model=model,
        split=split,
        baseline_channel=raw.get("baseline", {}).get("channel", "ankle_x"),
        output_dir=raw.get("output_dir", "runs"),
    )


def load_config(path, overrides=None):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e})") from None
    return config_from_dict(raw, overrides)
