from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from pydantic import ValidationError

from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.core.exceptions import FileFormatError
from lcnf_fpm.core.schemas import (
    DatasetEntry,
    DatasetIndex,
    MeasurementIndex,
    PatternRecord,
)
from lcnf_fpm.io.float_image import read_float_image, write_float_image
from lcnf_fpm.optics import IlluminationPattern
from lcnf_fpm.simulation.dataset import DatasetPair
from lcnf_fpm.simulation.forward import MeasurementSet


def _load_index(path: Path, model: type[DatasetIndex] | type[MeasurementIndex]):
    try:
        return model.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise FileFormatError(f"index file {path} does not exist") from e
    except ValidationError as e:
        raise FileFormatError(f"{path} is not a valid {model.__name__}: {e.error_count()} errors") from e


def write_dataset_split(
    pairs: Sequence[DatasetPair], directory: str | Path, split: str, config_hash: str
) -> tuple[Path, list[Path]]:
    """
    Store a split as one float-map per channel plus a JSON index next to them.
    Returns:
        The index path and every data file written, in write order
    """
    directory = Path(directory)
    split_dir = directory / split
    split_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    entries = []
    for number, pair in enumerate(pairs):
        inputs = []
        for channel, image in enumerate(pair.inputs):
            path = write_float_image(split_dir / f"pair_{number:04d}_ch{channel}.pfm", image)
            inputs.append(path.relative_to(directory).as_posix())
            written.append(path)
        target = write_float_image(split_dir / f"pair_{number:04d}_target.pfm", pair.target)
        written.append(target)
        entries.append(
            DatasetEntry(
                inputs=inputs,
                target=target.relative_to(directory).as_posix(),
                seed=pair.seed,
                scale=pair.scale,
                phase_scale=pair.phase_scale,
                phase_offset=pair.phase_offset,
            )
        )
    index = DatasetIndex(split=split, config_hash=config_hash, pairs=entries)
    index_path = directory / f"{split}_index.json"
    index_path.write_text(index.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Stored {len(entries)} {split} pairs under {split_dir}")
    return index_path, written


def read_dataset_split(index_path: str | Path) -> list[DatasetPair]:
    index_path = Path(index_path)
    index = _load_index(index_path, DatasetIndex)
    base = index_path.parent
    pairs = []
    for entry in index.pairs:
        inputs = np.stack([read_float_image(base / name).astype(np.float64) for name in entry.inputs])
        pairs.append(
            DatasetPair(
                inputs=inputs,
                target=read_float_image(base / entry.target).astype(np.float64),
                scale=entry.scale,
                phase_scale=entry.phase_scale,
                phase_offset=entry.phase_offset,
                seed=entry.seed,
            )
        )
    return pairs


def write_measurements(
    measurements: MeasurementSet,
    directory: str | Path,
    mode: Literal["multiplexed", "sequential"],
) -> tuple[Path, list[Path]]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []
    written = []
    for number, (image, pattern) in enumerate(zip(measurements.images, measurements.patterns)):
        label = pattern.name or f"pattern-{number:03d}"
        path = write_float_image(directory / f"{number:03d}_{label}.pfm", image)
        written.append(path)
        records.append(
            PatternRecord(
                name=pattern.name,
                kind=pattern.kind.value,
                leds=[(float(ux), float(uy)) for ux, uy in pattern.leds],
                image=path.name,
            )
        )
    index = MeasurementIndex(mode=mode, system=measurements.system, patterns=records)
    index_path = directory / "measurements.json"
    index_path.write_text(index.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return index_path, written


def read_measurements(index_path: str | Path) -> MeasurementSet:
    """
    Raises:
        FileFormatError: If the index or one of its images cannot be read
    """
    index_path = Path(index_path)
    index = _load_index(index_path, MeasurementIndex)
    images = []
    patterns = []
    for record in index.patterns:
        image_path = index_path.parent / record.image
        if not image_path.exists():
            raise FileFormatError(f"measurement image {image_path} is missing")
        images.append(read_float_image(image_path).astype(np.float64))
        leds = np.asarray(record.leds, dtype=np.float64).reshape(-1, 2)
        leds.setflags(write=False)
        patterns.append(
            IlluminationPattern(
                leds=leds, kind=IlluminationKind(record.kind), name=record.name
            )
        )
    return MeasurementSet(
        images=images, patterns=patterns, system=index.system, metadata={"mode": index.mode}
    )
