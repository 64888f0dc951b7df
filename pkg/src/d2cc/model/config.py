"""Model and training configuration with key=value file parsing."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from ..errors import DataError


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions and vocabulary settings for the tree-encoder scorer."""

    word_dim: int = 64
    pos_dim: int = 50
    label_dim: int = 50
    seq_dim: int = 300
    seq_layers: int = 2
    tree_dim: int = 300
    mlp_dim: int = 100
    unk_buckets: int = 8
    ext_embeddings: str = ""


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.9
    eps: float = 1e-8
    epochs: int = 200
    batch_size: int = 8
    seed: int = 0
    shuffle: bool = True
    early_stop_acc: float = 0.0


def _convert(raw: str, target: type, key: str, origin: str):
    if target is bool:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise DataError("%s: bad boolean for %s: %r" % (origin, key, raw))
    try:
        return target(raw)
    except ValueError:
        raise DataError("%s: bad value for %s: %r" % (origin, key, raw))


def parse_config_text(text: str, origin: str = "<string>") -> dict:
    """Parse ``key = value`` lines ('#' starts a comment) into a dict."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError("%s:%d: expected key=value" % (origin, lineno))
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def configs_from_dict(raw: dict, origin: str = "<string>"):
    """Split a raw key=value dict into (ModelConfig, TrainConfig)."""
    model_fields = {f.name: f.type for f in fields(ModelConfig)}
    train_fields = {f.name: f.type for f in fields(TrainConfig)}
    model_kwargs, train_kwargs = {}, {}
    types = {"int": int, "float": float, "bool": bool, "str": str}
    for key, value in raw.items():
        if key in model_fields:
            model_kwargs[key] = _convert(value, types[model_fields[key]], key, origin)
        elif key in train_fields:
            train_kwargs[key] = _convert(value, types[train_fields[key]], key, origin)
        else:
            raise DataError("%s: unknown configuration key %r" % (origin, key))
    return ModelConfig(**model_kwargs), TrainConfig(**train_kwargs)


def load_config_file(path):
    """Read a key=value config file holding model and training settings."""
    text = Path(path).read_text(encoding="utf-8")
    return configs_from_dict(parse_config_text(text, str(path)), str(path))
