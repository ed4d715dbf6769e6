import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from lcnf_fpm.core.exceptions import FileFormatError
from lcnf_fpm.nn.optim import AdamState

MAGIC = b"LCNFCK01"
FORMAT_VERSION = 1
_LENGTH = struct.Struct("<Q")


@dataclass
class Checkpoint:
    parameters: dict[str, np.ndarray]
    config: dict[str, Any]
    config_hash: str
    optimizer: Optional[AdamState] = None
    metadata: dict[str, Any] = field(default_factory=dict)


def write_checkpoint(path: str | Path, checkpoint: Checkpoint) -> Path:
    """
    Store parameters (and optionally Adam moments) as little-endian float64 blobs behind a JSON header.
    Layout: magic, uint64 header length, UTF-8 JSON header, concatenated blobs.
    """
    blobs: list[bytes] = []
    entries = []
    offset = 0

    def add(name: str, values: np.ndarray) -> None:
        nonlocal offset
        raw = np.ascontiguousarray(values, dtype="<f8").tobytes()
        entries.append({"name": name, "shape": list(values.shape), "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)

    for name, values in checkpoint.parameters.items():
        add(name, values)

    optimizer = None
    if checkpoint.optimizer is not None:
        state = checkpoint.optimizer
        for index, (first, second) in enumerate(zip(state.first, state.second)):
            add(f"adam.first.{index}", first)
            add(f"adam.second.{index}", second)
        optimizer = {
            "lr": state.lr,
            "beta1": state.beta1,
            "beta2": state.beta2,
            "eps": state.eps,
            "step": state.step,
            "moments": len(state.first),
        }

    header = {
        "version": FORMAT_VERSION,
        "config_hash": checkpoint.config_hash,
        "config": checkpoint.config,
        "parameters": list(checkpoint.parameters),
        "optimizer": optimizer,
        "metadata": checkpoint.metadata,
        "blobs": entries,
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(_LENGTH.pack(len(encoded)))
        handle.write(encoded)
        for raw in blobs:
            handle.write(raw)
    return path


def read_checkpoint(path: str | Path) -> Checkpoint:
    """
    Raises:
        FileFormatError: On a magic or version mismatch, or a truncated header or payload
    """
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError as e:
        raise FileFormatError(f"checkpoint {path} does not exist") from e
    prefix = len(MAGIC) + _LENGTH.size
    if len(data) < prefix:
        raise FileFormatError(
            f"checkpoint {path} truncated: expected at least {prefix} bytes, got {len(data)}",
            {"expected_bytes": prefix, "actual_bytes": len(data)},
        )
    if data[: len(MAGIC)] != MAGIC:
        raise FileFormatError(f"{path} is not a checkpoint (magic {data[:len(MAGIC)]!r})")
    (header_length,) = _LENGTH.unpack_from(data, len(MAGIC))
    if len(data) < prefix + header_length:
        raise FileFormatError(
            f"checkpoint {path} truncated: expected {prefix + header_length} header bytes, got {len(data)}",
            {"expected_bytes": prefix + header_length, "actual_bytes": len(data)},
        )
    try:
        header = json.loads(data[prefix : prefix + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FileFormatError(f"checkpoint {path} has an unreadable header") from e
    if header.get("version") != FORMAT_VERSION:
        raise FileFormatError(
            f"checkpoint version {header.get('version')} is not supported (expected {FORMAT_VERSION})"
        )

    payload = data[prefix + header_length :]
    expected = sum(entry["nbytes"] for entry in header["blobs"])
    if len(payload) < expected:
        raise FileFormatError(
            f"checkpoint {path} truncated: expected {expected} payload bytes, got {len(payload)}",
            {"expected_bytes": expected, "actual_bytes": len(payload)},
        )
    arrays = {
        entry["name"]: np.frombuffer(
            payload, dtype="<f8", count=entry["nbytes"] // 8, offset=entry["offset"]
        ).reshape(entry["shape"]).astype(np.float64)
        for entry in header["blobs"]
    }

    optimizer = None
    if header["optimizer"] is not None:
        settings = header["optimizer"]
        count = settings["moments"]
        optimizer = AdamState(
            lr=settings["lr"],
            beta1=settings["beta1"],
            beta2=settings["beta2"],
            eps=settings["eps"],
            first=[arrays[f"adam.first.{i}"] for i in range(count)],
            second=[arrays[f"adam.second.{i}"] for i in range(count)],
            step=settings["step"],
        )
    return Checkpoint(
        parameters={name: arrays[name] for name in header["parameters"]},
        config=header["config"],
        config_hash=header["config_hash"],
        optimizer=optimizer,
        metadata=header["metadata"],
    )
