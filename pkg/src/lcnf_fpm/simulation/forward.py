from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.core.exceptions import (
    ConfigurationError,
    GridSupportError,
    PhysicsModelError,
    ShapeMismatchError,
)
from lcnf_fpm.core.schemas import OpticalSystem
from lcnf_fpm.optics import (
    FrequencyGrid,
    IlluminationPattern,
    Pupil,
    crop_spectrum,
    forward_fft,
    inverse_fft,
    led_pixel_offset,
    make_frequency_axes,
    make_pupil,
)
from lcnf_fpm.simulation.objects import ObjectField


@dataclass
class MeasurementSet:
    """
    Intensity images paired with the illumination patterns that produced them.
    Images are sampled at the object-plane pitch of the optical system.
    """

    images: list[np.ndarray]
    patterns: list[IlluminationPattern]
    system: OpticalSystem
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.images) != len(self.patterns):
            raise ShapeMismatchError(
                f"{len(self.images)} images but {len(self.patterns)} patterns"
            )
        shapes = {image.shape for image in self.images}
        if len(shapes) > 1:
            raise ShapeMismatchError(f"images have mixed shapes {sorted(shapes)}")
        for index, image in enumerate(self.images):
            if np.any(image < 0):
                raise PhysicsModelError(f"image {index} has negative intensities")

    @property
    def shape(self) -> tuple[int, int]:
        return self.images[0].shape  # type: ignore[return-value]

    @property
    def pitch(self) -> float:
        return self.system.object_pitch_um

    def of_kind(self, kind: IlluminationKind) -> list[int]:
        return [index for index, pattern in enumerate(self.patterns) if pattern.kind == kind]


def check_led_support(grid: FrequencyGrid, system: OpticalSystem, u: np.ndarray, name: str = "") -> None:
    needed = float(np.hypot(u[0], u[1])) + system.cutoff_freq
    if needed > grid.nyquist * (1 + 1e-9):
        raise GridSupportError(
            f"LED {name or tuple(u)} at |u| = {np.hypot(u[0], u[1]):.4f} 1/um needs a Nyquist "
            f"frequency of {needed:.4f} 1/um but the grid only reaches {grid.nyquist:.4f}",
            {"led": [float(u[0]), float(u[1])], "pattern": name, "required_nyquist": needed},
        )


def _shifted_intensity(spectrum: np.ndarray, pupil_mask: np.ndarray, shift: tuple[int, int]) -> np.ndarray:
    # np.roll by +k gives rolled[u] = spectrum[u - k], i.e. O(u - u_i)
    return np.abs(inverse_fft(np.roll(spectrum, shift, axis=(0, 1)) * pupil_mask)) ** 2


def _resolve_pupil(obj: ObjectField, system: OpticalSystem, pupil: Optional[Pupil]) -> Pupil:
    if pupil is None:
        return make_pupil(system, obj.shape, obj.pitch)
    if pupil.shape != obj.shape:
        raise ShapeMismatchError(f"pupil {pupil.shape} does not match object grid {obj.shape}")
    return pupil


def simulate_single_led(
    obj: ObjectField,
    system: OpticalSystem,
    u: np.ndarray | tuple[float, float],
    pupil: Optional[Pupil] = None,
) -> np.ndarray:
    """
    High-resolution intensity under one LED: |F^-1[O(u - u_i) P(u)]|^2.
    Args:
        obj: Object on the high-resolution grid
        system: Optical system
        u: LED frequency (ux, uy) in 1/um
        pupil: Pupil on the object grid, ideal disk when omitted
    Returns:
        Non-negative intensity on the object grid
    Raises:
        GridSupportError: If the shifted pupil passband exceeds the grid Nyquist frequency
    """
    u = np.asarray(u, dtype=np.float64)
    pupil = _resolve_pupil(obj, system, pupil)
    check_led_support(pupil.grid, system, u)
    shift, _ = led_pixel_offset(u, pupil.grid.spacing)
    return _shifted_intensity(obj.field().spectrum(), pupil.mask, shift)


def simulate_multiplexed(
    obj: ObjectField,
    system: OpticalSystem,
    pattern: IlluminationPattern,
    pupil: Optional[Pupil] = None,
) -> np.ndarray:
    """
    Sum of single-LED intensities over the pattern, accumulated in LED order.
    """
    if len(pattern) == 0:
        raise ConfigurationError("cannot simulate an empty illumination pattern")
    pupil = _resolve_pupil(obj, system, pupil)
    spectrum = obj.field().spectrum()
    total = np.zeros(obj.shape)
    for u in pattern.leds:
        check_led_support(pupil.grid, system, u, pattern.name)
        shift, _ = led_pixel_offset(u, pupil.grid.spacing)
        total += _shifted_intensity(spectrum, pupil.mask, shift)
    return total


def downsample_intensity(hr_intensity: np.ndarray, factor: int) -> np.ndarray:
    """
    Block-mean pooling by an integer factor.
    """
    rows, cols = hr_intensity.shape
    if factor < 1 or rows % factor or cols % factor:
        raise ConfigurationError(
            f"downsampling factor {factor} does not divide the {hr_intensity.shape} image"
        )
    return hr_intensity.reshape(rows // factor, factor, cols // factor, factor).mean(axis=(1, 3))


def add_poisson_noise(intensity: np.ndarray, photons: float, rng: np.random.Generator) -> np.ndarray:
    """
    Shot noise with `photons` expected counts at unit intensity.
    """
    if photons <= 0:
        raise ConfigurationError(f"photon count must be positive, got {photons}")
    return rng.poisson(np.clip(intensity, 0, None) * photons).astype(np.float64) / photons


def flat_field_intensity(
    system: OpticalSystem,
    patterns: Sequence[IlluminationPattern],
    shape: tuple[int, int],
    pitch: float,
) -> float:
    """
    Mean intensity a blank object produces under the brightfield patterns.
    Simulated images are divided by this so their background sits near 1.
    """
    flat = ObjectField(absorption=np.zeros(shape), phase=np.zeros(shape), pitch=pitch)
    pupil = make_pupil(system, shape, pitch)
    levels = [
        float(simulate_multiplexed(flat, system, pattern, pupil).mean())
        for pattern in patterns
        if pattern.kind == IlluminationKind.BRIGHTFIELD
    ]
    if not levels or max(levels) == 0:
        raise PhysicsModelError("normalisation requires at least one brightfield pattern")
    return float(np.mean(levels))


def simulate_patterns(
    obj: ObjectField,
    system: OpticalSystem,
    patterns: Sequence[IlluminationPattern],
    factor: int,
    normalization: float = 1.0,
    jobs: int = 1,
) -> MeasurementSet:
    """
    Multiplexed measurements at sensor resolution: simulate on the object grid, then block-mean.
    Patterns run in a thread pool when jobs > 1; results keep the pattern order.
    """
    pupil = make_pupil(system, obj.shape, obj.pitch)

    def run(pattern: IlluminationPattern) -> np.ndarray:
        hr = simulate_multiplexed(obj, system, pattern, pupil) / normalization
        return downsample_intensity(hr, factor)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            images = list(executor.map(run, patterns))
    else:
        images = [run(pattern) for pattern in patterns]
    return MeasurementSet(images=images, patterns=list(patterns), system=system)


def simulate_camera_image(
    obj: ObjectField,
    system: OpticalSystem,
    u: np.ndarray | tuple[float, float],
    factor: int,
    pupil: Optional[Pupil] = None,
) -> np.ndarray:
    """
    Sensor-resolution image under one LED from the standard low-resolution FPM model.
    The shifted object spectrum is cropped to the sensor grid, filtered by the pupil and
    transformed back on the coarse grid.
    Args:
        obj: Object on a grid `factor` times finer than the sensor
        system: Optical system
        u: LED frequency (ux, uy) in 1/um
        factor: Ratio between object grid and sensor grid
        pupil: Pupil on the sensor grid, ideal disk when omitted
    Returns:
        Intensity on the sensor grid
    """
    rows, cols = obj.shape
    if rows % factor or cols % factor:
        raise ConfigurationError(f"factor {factor} does not divide the object grid {obj.shape}")
    lr_shape = (rows // factor, cols // factor)
    lr_pitch = obj.pitch * factor
    if pupil is None:
        pupil = make_pupil(system, lr_shape, lr_pitch)
    hr_grid = make_frequency_axes(obj.shape, obj.pitch)
    u = np.asarray(u, dtype=np.float64)
    check_led_support(hr_grid, system, u)
    shift, _ = led_pixel_offset(u, hr_grid.spacing)
    ratio = (lr_shape[0] * lr_shape[1]) / (rows * cols)
    window = ratio * crop_spectrum(forward_fft(obj.transmittance()), (-shift[0], -shift[1]), lr_shape)
    return np.abs(inverse_fft(window * pupil.mask)) ** 2


def simulate_sequential(
    obj: ObjectField,
    system: OpticalSystem,
    patterns: Sequence[IlluminationPattern],
    factor: int,
    photons: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
) -> MeasurementSet:
    """
    Camera-resolution data set for the FPM solver, one image per pattern.
    """
    rows, cols = obj.shape
    lr_shape = (rows // factor, cols // factor)
    pupil = make_pupil(system, lr_shape, obj.pitch * factor)
    images = []
    for pattern in patterns:
        image = np.zeros(lr_shape)
        for u in pattern.leds:
            image += simulate_camera_image(obj, system, u, factor, pupil)
        if photons is not None:
            image = add_poisson_noise(image, photons, rng or np.random.default_rng(0))
        images.append(image)
    logger.info(f"Simulated {len(images)} sequential images at {lr_shape}")
    return MeasurementSet(images=images, patterns=list(patterns), system=system)
