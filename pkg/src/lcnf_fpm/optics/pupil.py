from dataclasses import dataclass

import numpy as np

from lcnf_fpm.core.exceptions import GridSupportError
from lcnf_fpm.core.schemas import OpticalSystem
from lcnf_fpm.optics.fft import FrequencyGrid, make_frequency_axes


@dataclass(frozen=True)
class Pupil:
    """
    Objective pupil sampled on a DC-centred frequency grid.
    The mask is complex so aberrations can be carried later; the ideal pupil is a 0/1 disk.
    """

    mask: np.ndarray
    cutoff_freq: float
    grid: FrequencyGrid

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape  # type: ignore[return-value]

    def support(self) -> np.ndarray:
        return self.grid.radius <= self.cutoff_freq * (1 + 1e-12)


def make_pupil(system: OpticalSystem, shape: tuple[int, int], pitch: float) -> Pupil:
    """
    Ideal circular pupil of radius NA/wavelength.
    Args:
        system: Optical system providing NA and wavelength
        shape: Grid shape (rows, cols)
        pitch: Sampling pitch of the grid in micrometres
    Returns:
        Pupil with a binary complex mask
    Raises:
        GridSupportError: If the grid Nyquist frequency is below the cutoff
    """
    grid = make_frequency_axes(shape, pitch)
    cutoff = system.cutoff_freq
    if grid.nyquist < cutoff:
        required = 1.0 / (2.0 * cutoff)
        raise GridSupportError(
            f"pitch {pitch:.4f} um cannot hold a pupil of cutoff {cutoff:.4f} 1/um; "
            f"use a pitch of at most {required:.4f} um",
            {"pitch": pitch, "required_pitch": required},
        )
    mask = (grid.radius <= cutoff * (1 + 1e-12)).astype(np.complex128)
    return Pupil(mask=mask, cutoff_freq=cutoff, grid=grid)
