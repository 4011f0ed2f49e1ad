"""Versioned checkpoint container shared by the text-to-unit model and the vocoder.

Layout: magic, version u8, config JSON (u32 length + UTF-8), tensor count u32,
then per tensor: name (u16 length + UTF-8), ndim u8, dims u32 each, f32
little-endian data.  Save/load round-trips are bit-exact for f32 tensors.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ArtifactError

CHECKPOINT_MAGIC = b"UTCK"
CHECKPOINT_VERSION = 1


def save_checkpoint(path: str | Path, config: dict, tensors: dict[str, np.ndarray]) -> None:
    config_bytes = json.dumps(config, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<B", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(config_bytes)))
        fh.write(config_bytes)
        fh.write(struct.pack("<I", len(tensors)))
        for name in sorted(tensors):
            data = np.ascontiguousarray(tensors[name], dtype="<f4")
            name_bytes = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<B", data.ndim))
            for dim in data.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(data.tobytes())


def load_checkpoint(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ArtifactError(f"{path}: not a checkpoint file")
    if raw[4] != CHECKPOINT_VERSION:
        raise ArtifactError(f"{path}: unsupported checkpoint version {raw[4]}")
    offset = 5
    (config_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    config = json.loads(raw[offset : offset + config_len].decode("utf-8"))
    offset += config_len
    (n_tensors,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    tensors: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        (name_len,) = struct.unpack_from("<H", raw, offset)
        offset += 2
        name = raw[offset : offset + name_len].decode("utf-8")
        offset += name_len
        ndim = raw[offset]
        offset += 1
        dims = struct.unpack_from(f"<{ndim}I", raw, offset) if ndim else ()
        offset += 4 * ndim
        count = int(np.prod(dims)) if dims else 1
        data = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        offset += 4 * count
        tensors[name] = data.reshape(dims).copy()
    return config, tensors
