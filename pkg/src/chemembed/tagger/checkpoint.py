"""Versioned binary model checkpoints.

Layout: 8-byte magic, little-endian uint32 format version, little-endian
uint64 header length, UTF-8 JSON header (config, tag set, character
alphabet, word dimension, array manifest), then the parameter matrices as
little-endian float64 in manifest order.  The loader rejects any magic or
version mismatch.
"""

from __future__ import annotations

import json
import struct
from typing import IO

import numpy as np

from ..errors import ParseError
from .config import TaggerConfig
from .model import TaggerParameters

MAGIC = b"CHEMBTAG"
FORMAT_VERSION = 1


def save_checkpoint(stream: IO[bytes], params: TaggerParameters,
                    config: TaggerConfig) -> None:
    header = {
        "config": config.to_dict(),
        "tags": list(params.tags),
        "alphabet": list(params.alphabet),
        "word_dim": params.word_dim,
        "arrays": [{"name": k, "shape": list(v.shape)}
                   for k, v in sorted(params.arrays.items())],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    stream.write(MAGIC)
    stream.write(struct.pack("<I", FORMAT_VERSION))
    stream.write(struct.pack("<Q", len(blob)))
    stream.write(blob)
    for name, _ in sorted(params.arrays.items()):
        stream.write(np.ascontiguousarray(params.arrays[name], dtype="<f8").tobytes())


def load_checkpoint(stream: IO[bytes]) -> tuple[TaggerParameters, TaggerConfig]:
    data = stream.read()
    if len(data) < len(MAGIC) + 12:
        raise ParseError("checkpoint truncated before header", source="checkpoint")
    if data[: len(MAGIC)] != MAGIC:
        raise ParseError(
            f"bad magic {data[:len(MAGIC)]!r}; not a tagger checkpoint",
            source="checkpoint")
    pos = len(MAGIC)
    (version,) = struct.unpack_from("<I", data, pos)
    pos += 4
    if version != FORMAT_VERSION:
        raise ParseError(
            f"unsupported checkpoint version {version} "
            f"(this build reads version {FORMAT_VERSION})",
            source="checkpoint")
    (header_len,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    if pos + header_len > len(data):
        raise ParseError("checkpoint truncated inside header", source="checkpoint")
    try:
        header = json.loads(data[pos:pos + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"corrupt checkpoint header: {exc}", source="checkpoint") from None
    pos += header_len
    config = TaggerConfig.from_dict(header["config"])
    arrays: dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if pos + nbytes > len(data):
            raise ParseError(
                f"checkpoint truncated inside array {entry['name']!r}: "
                f"expected {nbytes} bytes, {len(data) - pos} available",
                source="checkpoint")
        arrays[entry["name"]] = np.frombuffer(
            data, dtype="<f8", count=count, offset=pos).reshape(shape).copy()
        pos += nbytes
    if pos != len(data):
        raise ParseError(f"{len(data) - pos} trailing bytes after arrays",
                         source="checkpoint")
    params = TaggerParameters(arrays, tuple(header["tags"]),
                              tuple(header["alphabet"]), int(header["word_dim"]))
    return params, config


def save_checkpoint_file(path, params: TaggerParameters, config: TaggerConfig) -> None:
    with open(path, "wb") as fh:
        save_checkpoint(fh, params, config)


def load_checkpoint_file(path) -> tuple[TaggerParameters, TaggerConfig]:
    with open(path, "rb") as fh:
        return load_checkpoint(fh)
