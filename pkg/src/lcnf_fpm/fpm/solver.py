import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.core.exceptions import (
    ConfigurationError,
    GridSupportError,
    NumericalError,
    ShapeMismatchError,
)
from lcnf_fpm.core.schemas import FpmConfig, OpticalSystem
from lcnf_fpm.optics import (
    ComplexField2D,
    IlluminationPattern,
    crop_spectrum,
    embed_spectrum,
    forward_fft,
    inverse_fft,
    led_pixel_offset,
    make_frequency_axes,
    make_pupil,
)
from lcnf_fpm.simulation.forward import MeasurementSet

EPS = 1e-12


@dataclass
class FpmState:
    """
    Joint estimate of the high-resolution object spectrum, the pupil and per-image offsets.
    The object spectrum is DC-centred on the high-resolution grid; the pupil lives on the
    sensor grid. shifts holds the (row, col) pixel offset of each LED.
    """

    object_spectrum: np.ndarray
    pupil: np.ndarray
    offsets: np.ndarray
    pitch: float
    shifts: list[tuple[int, int]]
    darkfield: np.ndarray
    pupil_support: np.ndarray
    loss_history: list[float] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        rows, cols = self.object_spectrum.shape
        lr_rows, lr_cols = self.pupil.shape
        return (lr_rows * lr_cols) / (rows * cols)

    def object_field(self) -> ComplexField2D:
        return ComplexField2D.from_spectrum(self.object_spectrum, self.pitch)

    def predicted_field(self, index: int) -> np.ndarray:
        """
        Sensor-plane field g_i = F^-1[crop(O(u - u_i)) P(u)] for measurement index.
        """
        shift = self.shifts[index]
        window = crop_spectrum(self.object_spectrum, (-shift[0], -shift[1]), self.pupil.shape)
        return inverse_fft(self.ratio * window * self.pupil)


def synthetic_na(system: OpticalSystem, patterns: Sequence[IlluminationPattern]) -> float:
    if not patterns:
        return system.objective_na
    return system.objective_na + max(pattern.max_na(system.wavelength_um) for pattern in patterns)


def _windows_fit(hr_shape: tuple[int, int], lr_shape: tuple[int, int], shifts: Sequence[tuple[int, int]]) -> bool:
    for axis in range(2):
        center = hr_shape[axis] // 2
        half = lr_shape[axis] // 2
        for shift in shifts:
            start = center - shift[axis] - half
            if start < 0 or start + lr_shape[axis] > hr_shape[axis]:
                return False
    return True


def upsample_factor_for(
    system: OpticalSystem, patterns: Sequence[IlluminationPattern], lr_shape: tuple[int, int]
) -> int:
    """
    Smallest integer refinement whose grid holds the synthetic band and every LED window.
    """
    pitch = system.object_pitch_um
    spacing = make_frequency_axes(lr_shape, pitch).spacing
    shifts = [led_pixel_offset(u, spacing)[0] for pattern in patterns for u in pattern.leds]
    factor = max(1, math.ceil(2 * pitch * synthetic_na(system, patterns) / system.wavelength_um - 1e-9))
    while not _windows_fit((lr_shape[0] * factor, lr_shape[1] * factor), lr_shape, shifts):
        factor += 1
    return factor


def fpm_objective(state: FpmState, measurements: MeasurementSet) -> float:
    """
    Sum over images of || sqrt(I_i) - |g_i| - b_i ||^2.
    """
    total = 0.0
    for index, image in enumerate(measurements.images):
        residual = np.sqrt(np.clip(image, 0, None)) - np.abs(state.predicted_field(index)) - state.offsets[index]
        total += float(np.sum(residual**2))
    return total


def _single_leds(measurements: MeasurementSet) -> list[np.ndarray]:
    leds = []
    for index, pattern in enumerate(measurements.patterns):
        if len(pattern) != 1:
            raise ConfigurationError(
                f"FPM reconstruction needs sequential single-LED data; pattern {index} has {len(pattern)} LEDs"
            )
        leds.append(pattern.leds[0])
    return leds


def initial_state(measurements: MeasurementSet, system: OpticalSystem, config: FpmConfig) -> FpmState:
    """
    Upsampled mean-brightfield amplitude as the object and the ideal disk as the pupil.
    """
    lr_shape = measurements.shape
    lr_pitch = system.object_pitch_um
    factor = config.upsample_factor or upsample_factor_for(system, measurements.patterns, lr_shape)
    hr_shape = (lr_shape[0] * factor, lr_shape[1] * factor)
    pupil = make_pupil(system, lr_shape, lr_pitch)

    shifts = []
    for index, u in enumerate(_single_leds(measurements)):
        shift, _ = led_pixel_offset(u, pupil.grid.spacing)
        if not _windows_fit(hr_shape, lr_shape, [shift]):
            raise GridSupportError(
                f"LED {index} at {tuple(u)} shifts its window by {shift} px, outside the {hr_shape} grid",
                {"led_index": index, "upsample_factor": factor},
            )
        shifts.append(shift)

    bright = measurements.of_kind(IlluminationKind.BRIGHTFIELD) or list(range(len(measurements.images)))
    mean_bright = np.mean([measurements.images[index] for index in bright], axis=0)
    ratio = (lr_shape[0] * lr_shape[1]) / (hr_shape[0] * hr_shape[1])
    spectrum = embed_spectrum(forward_fft(np.sqrt(np.clip(mean_bright, 0, None))) / ratio, hr_shape)

    darkfield = np.array([pattern.kind == IlluminationKind.DARKFIELD for pattern in measurements.patterns])
    logger.info(f"FPM grid {lr_shape} -> {hr_shape} (factor {factor}), {len(shifts)} LEDs")
    return FpmState(
        object_spectrum=spectrum,
        pupil=pupil.mask.copy(),
        offsets=np.zeros(len(shifts)),
        pitch=lr_pitch / factor,
        shifts=shifts,
        darkfield=darkfield,
        pupil_support=pupil.support(),
    )


def _update_led(state: FpmState, amplitude: np.ndarray, index: int, config: FpmConfig) -> None:
    shift = state.shifts[index]
    offset = (-shift[0], -shift[1])
    ratio = state.ratio
    window = ratio * crop_spectrum(state.object_spectrum, offset, state.pupil.shape)
    exit_spectrum = window * state.pupil
    field = inverse_fft(exit_spectrum)
    corrected = (amplitude - state.offsets[index]) * field / (np.abs(field) + EPS)
    delta = forward_fft(corrected) - exit_spectrum

    pupil_power = float(np.max(np.abs(state.pupil) ** 2))
    updated = window + config.object_step * np.conj(state.pupil) * delta / max(pupil_power, EPS)
    if config.enable_pupil_recovery:
        window_power = float(np.max(np.abs(window) ** 2))
        state.pupil = state.pupil + config.pupil_step * np.conj(window) * delta / max(window_power, EPS)
        state.pupil[~state.pupil_support] = 0
    embed_spectrum((updated - window) / ratio, state.object_spectrum.shape, offset, target=state.object_spectrum)


def _update_offsets(state: FpmState, amplitudes: Sequence[np.ndarray]) -> None:
    for index in np.flatnonzero(state.darkfield):
        estimate = float(np.mean(amplitudes[index] - np.abs(state.predicted_field(index))))
        if estimate < 0:
            logger.debug(f"offset of image {index} clamped from {estimate:.3e} to 0")
        state.offsets[index] = max(estimate, 0.0)


def fpm_reconstruct(measurements: MeasurementSet, system: OpticalSystem, config: FpmConfig) -> FpmState:
    """
    Sequential amplitude-replacement reconstruction with optional pupil and offset recovery.
    Args:
        measurements: Sequential single-LED images on the sensor grid
        system: Optical system used to take them
        config: Solver settings
    Returns:
        Final FpmState; loss_history[0] is the objective at initialisation
    Raises:
        ConfigurationError: If a pattern holds more than one LED
        GridSupportError: If an LED window leaves the high-resolution grid
        NumericalError: If the objective stops being finite
    """
    if measurements.system != system:
        logger.warning("measurement set was recorded with a different optical system")
    if not measurements.images:
        raise ShapeMismatchError("no measurements to reconstruct")
    state = initial_state(measurements, system, config)
    amplitudes = [np.sqrt(np.clip(image, 0, None)) for image in measurements.images]
    order = sorted(
        range(len(amplitudes)),
        key=lambda index: float(np.hypot(*measurements.patterns[index].leds[0])),
    )

    state.loss_history.append(fpm_objective(state, measurements))
    for epoch in range(config.epochs):
        for index in order:
            _update_led(state, amplitudes[index], index, config)
        if config.enable_offsets:
            _update_offsets(state, amplitudes)
        loss = fpm_objective(state, measurements)
        if not np.isfinite(loss):
            raise NumericalError(f"FPM objective became non-finite at epoch {epoch}", {"epoch": epoch})
        state.loss_history.append(loss)
        logger.info(f"FPM epoch {epoch + 1}/{config.epochs}: objective {loss:.6e}")
    return state
