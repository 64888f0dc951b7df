"""Versioned binary model checkpoints.

Layout: 4 magic bytes, a little-endian uint32 format version, a
little-endian uint32 header length, a JSON header (configuration,
vocabularies and tensor shapes, keys sorted), then the raw float64
little-endian bytes of every tensor in sorted name order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import CheckpointError, DataError
from .config import ModelConfig
from .network import Model
from .vocab import Vocabulary, load_ext_embeddings

MAGIC = b"D2CC"
VERSION = 1


def save_model(model: Model, path) -> None:
    names = sorted(model.params)
    header = {
        "config": asdict(model.config),
        "vocab": {
            "words": list(model.vocab.words),
            "pos": list(model.vocab.pos),
            "labels": list(model.vocab.labels),
            "categories": list(model.vocab.categories),
            "unk_buckets": model.vocab.unk_buckets,
        },
        "tensors": [[name, list(model.params[name].shape)]
                    for name in names],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<II", VERSION, len(blob)))
        handle.write(blob)
        for name in names:
            arr = np.ascontiguousarray(model.params[name], dtype="<f8")
            handle.write(arr.tobytes())


def load_model(path) -> Model:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise CheckpointError("%s: not a model checkpoint" % path)
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != VERSION:
        raise CheckpointError("%s: unsupported checkpoint version %d"
                              % (path, version))
    if len(raw) < 12 + header_len:
        raise CheckpointError("%s: truncated checkpoint header" % path)
    try:
        header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    except ValueError:
        raise CheckpointError("%s: corrupt checkpoint header" % path)
    try:
        config = ModelConfig(**header["config"])
        voc = header["vocab"]
        vocab = Vocabulary(words=tuple(voc["words"]),
                           pos=tuple(voc["pos"]),
                           labels=tuple(voc["labels"]),
                           categories=tuple(voc["categories"]),
                           unk_buckets=voc["unk_buckets"])
        tensors = header["tensors"]
    except (KeyError, TypeError):
        raise CheckpointError("%s: malformed checkpoint header" % path)
    params = {}
    offset = 12 + header_len
    for name, shape in tensors:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(raw):
            raise CheckpointError("%s: truncated tensor %s" % (path, name))
        flat = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        params[name] = flat.astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError("%s: %d trailing bytes" % (path, len(raw) - offset))
    ext, ext_dim = None, 0
    if config.ext_embeddings:
        try:
            ext, ext_dim = load_ext_embeddings(config.ext_embeddings)
        except OSError as exc:
            raise DataError("cannot read external embeddings %s: %s"
                            % (config.ext_embeddings, exc))
    return Model(config=config, vocab=vocab, params=params,
                 ext=ext, ext_dim=ext_dim)
