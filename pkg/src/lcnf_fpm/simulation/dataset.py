from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError, LcnfException, ShapeMismatchError
from lcnf_fpm.core.schemas import OpticalSystem, PreprocessConfig, SimulationConfig
from lcnf_fpm.optics import IlluminationPattern, semicircle_and_arc_patterns
from lcnf_fpm.preprocess import prepare_network_inputs
from lcnf_fpm.simulation.forward import flat_field_intensity, simulate_patterns
from lcnf_fpm.simulation.objects import ObjectField, generate_phantom

INPUT_CHANNELS = 6


@dataclass(frozen=True)
class DatasetPair:
    """
    Six low-resolution input channels and the normalised high-resolution phase target.
    Radians are recovered as target * phase_scale + phase_offset.
    """

    inputs: np.ndarray
    target: np.ndarray
    scale: int
    phase_scale: float = 9.0
    phase_offset: float = -2.5
    seed: int = -1

    def __post_init__(self) -> None:
        if self.inputs.ndim != 3 or self.inputs.shape[0] != INPUT_CHANNELS:
            raise ShapeMismatchError(
                f"inputs must have shape ({INPUT_CHANNELS}, rows, cols), got {self.inputs.shape}"
            )
        expected = (self.inputs.shape[1] * self.scale, self.inputs.shape[2] * self.scale)
        if self.target.shape != expected:
            raise ShapeMismatchError(
                f"target {self.target.shape} is not {self.scale}x the input grid {self.inputs.shape[1:]}"
            )

    def target_radians(self) -> np.ndarray:
        return self.target * self.phase_scale + self.phase_offset


def _build_pair(
    index: int,
    obj: ObjectField,
    system: OpticalSystem,
    patterns: Sequence[IlluminationPattern],
    scale: int,
    preprocess: PreprocessConfig,
    normalization: float,
    seed: int,
) -> DatasetPair:
    try:
        measurements = simulate_patterns(obj, system, patterns, scale, normalization)
        inputs = prepare_network_inputs(measurements, preprocess)
    except LcnfException as e:
        raise type(e)(f"object {index}: {e}", {**e.details, "object_index": index}) from e
    target = np.clip((obj.phase - preprocess.sim_phase_offset) / preprocess.sim_phase_scale, 0.0, 1.0)
    return DatasetPair(
        inputs=inputs,
        target=target,
        scale=scale,
        phase_scale=preprocess.sim_phase_scale,
        phase_offset=preprocess.sim_phase_offset,
        seed=seed,
    )


def build_dataset(
    objects: Sequence[ObjectField],
    system: OpticalSystem,
    patterns: Sequence[IlluminationPattern],
    scale: int,
    preprocess: Optional[PreprocessConfig] = None,
    seeds: Optional[Sequence[int]] = None,
    jobs: int = 1,
) -> list[DatasetPair]:
    """
    Simulate, condition and pair every object.
    Args:
        objects: High-resolution objects, each `scale` times finer than the sensor
        system: Optical system
        patterns: The five multiplexed patterns (2 brightfield, 3 darkfield)
        scale: Upsampling factor between inputs and targets
        preprocess: Preprocessing constants
        seeds: Seed recorded with each pair
        jobs: Worker threads; pairs come back in object order
    Returns:
        One DatasetPair per object
    """
    preprocess = preprocess or PreprocessConfig()
    if len(patterns) != 5:
        raise ConfigurationError(f"datasets need the 5 multiplexed patterns, got {len(patterns)}")
    if not objects:
        return []
    expected_shape = (system.sensor_shape[0] * scale, system.sensor_shape[1] * scale)
    expected_pitch = system.object_pitch_um / scale
    for index, obj in enumerate(objects):
        if obj.shape != expected_shape or not np.isclose(obj.pitch, expected_pitch, rtol=1e-9):
            raise ConfigurationError(
                f"object {index} is {obj.shape} at {obj.pitch} um; expected {expected_shape} "
                f"at {expected_pitch} um for scale {scale}",
                {"object_index": index},
            )
    seeds = list(seeds) if seeds is not None else [-1] * len(objects)
    normalization = flat_field_intensity(system, patterns, expected_shape, expected_pitch)

    def run(index: int) -> DatasetPair:
        return _build_pair(
            index, objects[index], system, patterns, scale, preprocess, normalization, seeds[index]
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            pairs = list(executor.map(run, range(len(objects))))
    else:
        pairs = [run(index) for index in range(len(objects))]
    logger.info(f"Built {len(pairs)} dataset pairs at {system.sensor_shape} -> {expected_shape}")
    return pairs


def phantom_objects(config: SimulationConfig, seeds: Sequence[int]) -> list[ObjectField]:
    return [
        generate_phantom(
            seed,
            config.hr_shape,
            config.phase_range,
            config.max_absorption,
            config.hr_pitch_um,
        )
        for seed in seeds
    ]


def build_phantom_dataset(config: SimulationConfig, seeds: Sequence[int], jobs: int = 1) -> list[DatasetPair]:
    patterns = semicircle_and_arc_patterns(
        config.system, config.max_illum_na, config.arc_count, config.led_spacing_na
    )
    return build_dataset(
        phantom_objects(config, seeds),
        config.system,
        patterns,
        config.scale,
        config.preprocess,
        seeds,
        jobs,
    )


def split_dataset(
    pairs: Sequence[DatasetPair], train: int, val: int, test: int
) -> tuple[list[DatasetPair], list[DatasetPair], list[DatasetPair]]:
    """
    Consecutive train/validation/test split, e.g. 800/50/50 or 18/2/2.
    """
    if train + val + test > len(pairs):
        raise ConfigurationError(
            f"split {train}/{val}/{test} needs {train + val + test} pairs, only {len(pairs)} available"
        )
    pairs = list(pairs)
    return pairs[:train], pairs[train : train + val], pairs[train + val : train + val + test]
