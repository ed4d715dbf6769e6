import hashlib
import json
import os
from pathlib import Path
from typing import Any, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel

__all__ = [
    "config_hash",
    "file_sha256",
    "get_output_root",
    "make_rng",
    "resolve_out_dir",
]


def config_hash(config: BaseModel | dict[str, Any]) -> str:
    """
    Hash the full numeric configuration.
    Args:
        config: A pydantic config model or a plain JSON-compatible dict
    Returns:
        Hex SHA-256 of the canonical JSON (sorted keys, compact separators)
    """
    payload = config.model_dump(mode="json") if isinstance(config, BaseModel) else config
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def get_output_root() -> Path:
    load_dotenv(override=True)
    return Path(os.getenv("LCNF_FPM_OUTPUT_ROOT") or "outputs")


def resolve_out_dir(out_dir: Optional[str], command: str) -> Path:
    """
    Use --out-dir when given, otherwise <output root>/<command>.
    """
    path = Path(out_dir) if out_dir else get_output_root() / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
