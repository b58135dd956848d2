"""Binary model checkpoints.

Layout: 4-byte magic, little-endian uint32 format version, uint64 header
length, UTF-8 JSON header, then one block per named array in header order.
Each block is a uint32 rank, that many uint64 dimensions, and the raw
float64 values, everything little-endian.  Loading a saved file reproduces
every array bit for bit.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import HIT_DIRECTIONS
from .featurize import FeatureSchema
from .model import ModelParams, init_params

MAGIC = b"MSCK"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    """The file is not a readable checkpoint of a supported version."""


@dataclass
class Checkpoint:
    params: ModelParams
    hit_directions: list[str]
    seed: int
    schema_hash: str
    log_summary: dict | None


def _named_arrays(params: ModelParams) -> list[tuple[str, np.ndarray]]:
    arrays = [(name, t.data) for name, t in params.named_parameters()]
    arrays.extend(params.named_state_arrays())
    return arrays


def save_checkpoint(
    path,
    params: ModelParams,
    hit_directions: list[str],
    seed: int,
    log_summary: dict | None = None,
) -> None:
    if len(hit_directions) != len(params.task_names):
        raise ValueError("one hit direction per task required")
    for d in hit_directions:
        if d not in HIT_DIRECTIONS:
            raise ValueError(f"hit direction {d!r} not in {HIT_DIRECTIONS}")
    arrays = _named_arrays(params)
    header = {
        "format_version": FORMAT_VERSION,
        "embed_dim": params.embed_dim,
        "n_layers": params.n_layers,
        "head_hidden": params.head_hidden,
        "dropout": params.dropout,
        "task_names": list(params.task_names),
        "hit_directions": list(hit_directions),
        "atom_widths": list(params.schema.atom_widths),
        "bond_widths": list(params.schema.bond_widths),
        "schema_hash": params.schema.schema_hash(),
        "seed": seed,
        "log_summary": log_summary,
        "arrays": [name for name, _ in arrays],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    chunks = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    chunks.append(struct.pack("<Q", len(header_bytes)))
    chunks.append(header_bytes)
    for _, arr in arrays:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        chunks.append(struct.pack("<I", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        chunks.append(arr.tobytes())
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise CheckpointError("checkpoint file is truncated")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"no such checkpoint: {path}")
    reader = _Reader(path.read_bytes())
    if reader.take(4) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = struct.unpack("<I", reader.take(4))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (header_len,) = struct.unpack("<Q", reader.take(8))
    try:
        header = json.loads(reader.take(header_len).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable checkpoint header: {exc}") from exc
    schema = FeatureSchema(
        atom_widths=tuple(header["atom_widths"]),
        bond_widths=tuple(header["bond_widths"]),
    )
    if schema.schema_hash() != header["schema_hash"]:
        raise CheckpointError("schema hash does not match schema widths")
    loaded: dict[str, np.ndarray] = {}
    for name in header["arrays"]:
        (ndim,) = struct.unpack("<I", reader.take(4))
        shape = struct.unpack(f"<{ndim}Q", reader.take(8 * ndim))
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        data = np.frombuffer(reader.take(8 * count), dtype="<f8")
        loaded[name] = data.reshape(shape).astype(np.float64)
    if reader.pos != len(reader.blob):
        raise CheckpointError("trailing bytes after final array")
    params = init_params(
        header["task_names"],
        embed_dim=header["embed_dim"],
        n_layers=header["n_layers"],
        head_hidden=header["head_hidden"],
        dropout=header["dropout"],
        seed=0,
        schema=schema,
    )
    expected = dict(_named_arrays(params))
    if set(expected) != set(loaded):
        raise CheckpointError("checkpoint arrays do not match the model layout")
    for name, tensor in params.named_parameters():
        if tensor.data.shape != loaded[name].shape:
            raise CheckpointError(
                f"array {name}: shape {loaded[name].shape}, "
                f"expected {tensor.data.shape}"
            )
        tensor.data = loaded[name].copy()
    for name, arr in params.named_state_arrays():
        if arr.shape != loaded[name].shape:
            raise CheckpointError(
                f"array {name}: shape {loaded[name].shape}, expected {arr.shape}"
            )
        arr[...] = loaded[name]
    return Checkpoint(
        params=params,
        hit_directions=list(header["hit_directions"]),
        seed=header["seed"],
        schema_hash=header["schema_hash"],
        log_summary=header["log_summary"],
    )
