from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import gaussian_filter

from lcnf_fpm.core.exceptions import ConfigurationError, ShapeMismatchError
from lcnf_fpm.core.schemas import PreprocessConfig
from lcnf_fpm.optics import ComplexField2D


@dataclass(frozen=True)
class ObjectField:
    """
    Thin sample o(c) = exp(-absorption + i * phase) on a high-resolution grid.
    """

    absorption: np.ndarray
    phase: np.ndarray
    pitch: float

    def __post_init__(self) -> None:
        if self.absorption.shape != self.phase.shape:
            raise ShapeMismatchError(
                f"absorption {self.absorption.shape} and phase {self.phase.shape} differ in shape"
            )
        if np.any(self.absorption < 0):
            raise ConfigurationError("absorption must be non-negative")
        if self.pitch <= 0:
            raise ConfigurationError(f"pitch must be positive, got {self.pitch}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.phase.shape  # type: ignore[return-value]

    def transmittance(self) -> np.ndarray:
        return np.exp(-self.absorption + 1j * self.phase)

    def field(self) -> ComplexField2D:
        return ComplexField2D(self.transmittance(), self.pitch)


def _rescale(values: np.ndarray, low: float, high: float) -> np.ndarray:
    span = values.max() - values.min()
    if span == 0:
        return np.full_like(values, low)
    return low + (high - low) * (values - values.min()) / span


def generate_phantom(
    seed: int,
    shape: tuple[int, int],
    phase_range: tuple[float, float] = (-2.5, 6.5),
    max_absorption: float = 0.1,
    pitch: float = 1.0,
) -> ObjectField:
    """
    Procedural stand-in for natural-image objects: smooth random blobs plus fine texture.
    Args:
        seed: Seed of the generator; equal seeds give bit-identical objects
        shape: Grid shape, at least 32x32
        phase_range: The phase spans exactly this interval (radians)
        max_absorption: Absorption spans [0, max_absorption]
        pitch: Grid pitch in micrometres
    Returns:
        ObjectField
    """
    rows, cols = shape
    if rows < 32 or cols < 32:
        raise ConfigurationError(f"phantoms need at least 32x32 pixels, got {shape}")
    low, high = phase_range
    if high <= low:
        raise ConfigurationError(f"phase_range must be increasing, got {phase_range}")

    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:rows, 0:cols].astype(np.float64)
    blobs = np.zeros(shape)
    for _ in range(int(rng.integers(6, 13))):
        center_y, center_x = rng.uniform(0, rows), rng.uniform(0, cols)
        sigma = rng.uniform(0.06, 0.2) * min(shape)
        amplitude = rng.uniform(-1.0, 1.0)
        blobs += amplitude * np.exp(-((yy - center_y) ** 2 + (xx - center_x) ** 2) / (2 * sigma**2))
    blobs /= max(float(blobs.std()), 1e-12)

    texture = gaussian_filter(rng.standard_normal(shape), sigma=1.0, mode="wrap")
    texture /= max(float(texture.std()), 1e-12)

    phase = _rescale(blobs + 0.3 * texture, low, high)
    absorption_seed = gaussian_filter(rng.standard_normal(shape), sigma=min(shape) / 8, mode="wrap")
    absorption = _rescale(absorption_seed, 0.0, max_absorption)
    return ObjectField(absorption=absorption, phase=phase, pitch=pitch)


def resolution_target_phantom(
    shape: tuple[int, int], period: int = 4, phase_step: float = np.pi / 2, pitch: float = 1.0
) -> ObjectField:
    """
    Phase-only bar target: vertical bars of width period / 2 raised by phase_step.
    """
    if period < 2:
        raise ConfigurationError(f"bar period must be at least 2 pixels, got {period}")
    cols = np.arange(shape[1])
    bars = ((cols % period) < period / 2).astype(np.float64)
    phase = np.broadcast_to(phase_step * bars, shape).copy()
    return ObjectField(absorption=np.zeros(shape), phase=phase, pitch=pitch)


def object_from_image(
    image: np.ndarray,
    pitch: float,
    config: PreprocessConfig,
    reference_psd: Optional[np.ndarray] = None,
) -> ObjectField:
    """
    Turn a natural image into a phase-only object with the simulated-data conditioning chain.
    """
    from lcnf_fpm.preprocess import condition_natural_image

    phase = condition_natural_image(image, config, reference_psd)
    return ObjectField(absorption=np.zeros_like(phase), phase=phase, pitch=pitch)
