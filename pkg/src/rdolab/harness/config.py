"""Experiment configuration: sectioned ``key = value`` files with strict keys.

::

    [experiment]
    id = sbvp
    train_resolution = 33
    test_resolutions = 33, 65, 129

    [model]
    kind = rdo
    t1 = 3
    ...

    [train]
    epochs = 500
    ...

The same format stores the architecture descriptor written next to a
checkpoint, so a trained model can be rebuilt from it.
"""
from __future__ import annotations

import configparser
import dataclasses
import io
import typing
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..models import ModelSpec


@dataclass
class TrainConfig:
    epochs: int = 500
    batch_size: int = 20
    lr: float = 1e-3
    lr_decay: float = 0.5
    lr_step: int = 100
    early_stopping: bool = True
    split: tuple = (6.0, 2.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        self.split = tuple(float(r) for r in self.split)
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if len(self.split) != 3 or any(r <= 0 for r in self.split):
            raise ConfigError(f"split needs three positive ratios, got {self.split}")
        if not (self.lr > 0 and 0 < self.lr_decay <= 1 and self.lr_step >= 1):
            raise ConfigError("lr must be positive, lr_decay in (0, 1], lr_step >= 1")

    @property
    def ratios(self):
        total = sum(self.split)
        return tuple(r / total for r in self.split)


@dataclass
class ExperimentConfig:
    id: str = "sbvp"
    train_resolution: int = 33
    test_resolutions: tuple = (33, 65, 129)
    model: ModelSpec = field(default_factory=ModelSpec)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        self.test_resolutions = tuple(int(r) for r in self.test_resolutions)


_SECTIONS = {"experiment": None, "model": ModelSpec, "train": TrainConfig}
_EXPERIMENT_KEYS = {"id": str, "train_resolution": int, "test_resolutions": tuple}


def _parse_value(raw, kind, key):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is tuple:
            return tuple(_number(v) for v in raw.replace(":", ",").split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {getattr(kind, '__name__', kind)}") from None


def _number(v):
    v = v.strip()
    f = float(v)
    return int(f) if f.is_integer() and "." not in v else f


def _field_types(cls):
    hints = typing.get_type_hints(cls)
    out = {}
    for f in dataclasses.fields(cls):
        t = hints[f.name]
        out[f.name] = t if t in (int, float, bool, str, tuple) else str
    return out


def parse_config(text, source="<config>"):
    """Parse config text into an :class:`ExperimentConfig`; unknown keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = set(cp.sections()) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")
    values = {}
    for section, cls in _SECTIONS.items():
        types = _EXPERIMENT_KEYS if cls is None else _field_types(cls)
        got = {}
        if cp.has_section(section):
            for key, raw in cp.items(section):
                if key not in types:
                    raise ConfigError(f"{source}: unknown key [{section}] {key}")
                got[key] = _parse_value(raw, types[key], f"[{section}] {key}")
        values[section] = got
    exp = values["experiment"]
    model_vals = values["model"]
    if "test_resolutions" not in exp and "train_resolution" in exp:
        exp["test_resolutions"] = (exp["train_resolution"],)
    try:
        model = ModelSpec(**model_vals)
        train = TrainConfig(**values["train"])
        return ExperimentConfig(model=model, train=train, **exp)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_config(cfg):
    """Serialize deterministically (field order, ``repr`` floats)."""
    buf = io.StringIO()
    buf.write("[experiment]\n")
    buf.write(f"id = {cfg.id}\n")
    buf.write(f"train_resolution = {cfg.train_resolution}\n")
    buf.write(f"test_resolutions = {_format(cfg.test_resolutions)}\n")
    for name, obj in (("model", cfg.model), ("train", cfg.train)):
        buf.write(f"\n[{name}]\n")
        for f in dataclasses.fields(obj):
            buf.write(f"{f.name} = {_format(getattr(obj, f.name))}\n")
    return buf.getvalue()
