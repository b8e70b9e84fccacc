"""Experiment configuration: TOML schema, validation, and builders.

The file format is flat key-value pairs grouped into one table per module:
[run], [network], [schedule], [data], [diagnostics], [output]. Unknown
tables or keys are rejected. A run manifest (JSON) embedding the same
structure can be loaded in place of a TOML file, which is how recorded runs
are replayed.
"""

from __future__ import annotations

import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .data import FoldSpec, SyntheticSpec
from .errors import ConfigError
from .schedulers import ScheduleSpec
from .trainer import TrainConfig

_SCHEMA = {
    "run": {
        "method": str,
        "seed": int,
        "epochs": int,
        "batch_size": int,
        "optimizer": str,
        "learning_rate": float,
        "eval_every": int,
        "n_hypotheses": int,
        "epsilon": float,
        "epsilon0": float,
    },
    "network": {
        "hidden": list,
        "head_activation": str,
    },
    "schedule": {
        "kind": str,
        "t0": float,
        "rho": float,
        "t_max": int,
        "floor": float,
    },
    "data": {
        "kind": str,
        "sigma": float,
        "pool_size": int,
        "validation_size": int,
        "path": str,
        "target_columns": list,
        "fold": int,
        "n_folds": int,
        "name": str,
    },
    "diagnostics": {
        "probe_grid": list,
        "samples_per_probe": int,
        "cluster_radius": float,
    },
    "output": {
        "directory": str,
    },
}


def load_config(path) -> dict:
    """Read and validate a TOML config, or the config echo of a JSON manifest."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
        raw = manifest.get("config", manifest)
    else:
        with open(path, "rb") as f:
            try:
                raw = tomllib.load(f)
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"{path}: {e}") from None
    validate_config(raw)
    return raw


def validate_config(raw: dict) -> None:
    for section, values in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in values.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            expected = _SCHEMA[section][key]
            if expected is float and isinstance(value, int):
                continue  # TOML integers are fine where floats are expected
            if not isinstance(value, expected):
                raise ConfigError(
                    f"[{section}].{key} should be {expected.__name__}, "
                    f"got {type(value).__name__}"
                )


def apply_override(raw: dict, spec: str) -> None:
    """Apply one `section.key=value` override in place; value parsed as TOML."""
    if "=" not in spec or "." not in spec.split("=", 1)[0]:
        raise ConfigError(f"override must look like section.key=value, got {spec!r}")
    target, value = spec.split("=", 1)
    section, key = target.split(".", 1)
    try:
        parsed = tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value  # bare string
    raw.setdefault(section, {})[key] = parsed
    validate_config(raw)


def build_train_config(raw: dict) -> TrainConfig:
    run = dict(raw.get("run", {}))
    if "method" not in run:
        raise ConfigError("[run].method is required")
    net = raw.get("network", {})
    data = raw.get("data", {})
    diag = raw.get("diagnostics", {})
    schedule = None
    if "schedule" in raw:
        schedule = ScheduleSpec(**raw["schedule"])
    dataset = None
    if data.get("kind", "three_gaussians") != "csv":
        dataset = SyntheticSpec(
            kind=data.get("kind", "three_gaussians"), sigma=data.get("sigma", 0.1)
        )
    kwargs = dict(
        method=run["method"],
        n_hypotheses=run.get("n_hypotheses", 5),
        epochs=run.get("epochs", 1000),
        seed=run.get("seed", 0),
        batch_size=run.get("batch_size", 1024),
        optimizer=run.get("optimizer", "sgd"),
        learning_rate=run.get("learning_rate", 0.01),
        eval_every=run.get("eval_every", 5),
        schedule=schedule,
        epsilon=run.get("epsilon", 0.1),
        epsilon0=run.get("epsilon0", 0.5),
        dataset=dataset,
        pool_size=data.get("pool_size", 100_000),
        validation_size=data.get("validation_size", 25_000),
        hidden=tuple(net.get("hidden", (256, 256))),
        head_activation=net.get("head_activation", "tanh"),
        cluster_radius=diag.get("cluster_radius", 0.01),
    )
    return TrainConfig(**kwargs)


def build_fold_spec(raw: dict) -> FoldSpec:
    data = raw.get("data", {})
    return FoldSpec(
        name=data.get("name", Path(data.get("path", "dataset")).stem),
        fold=data.get("fold", 0),
        n_folds=data.get("n_folds", 20),
    )
