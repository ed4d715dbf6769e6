from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lcnf_fpm.core.exceptions import PhysicsModelError
from lcnf_fpm.core.schemas import OpticalSystem
from lcnf_fpm.optics import IlluminationPattern, Pupil, led_pixel_offset, make_pupil


@dataclass(frozen=True)
class TransferPair:
    """
    Weak-object transfer functions of one illumination pattern, DC-centred.
    The normalised intensity spectrum is background * delta + h_abs * M + h_ph * Psi.
    """

    h_abs: np.ndarray
    h_ph: np.ndarray
    background: float = 1.0


def _reflect(spectrum: np.ndarray) -> np.ndarray:
    # value at -u for every u of a DC-centred grid
    flipped = spectrum[::-1, ::-1]
    return np.roll(flipped, (1 - spectrum.shape[0] % 2, 1 - spectrum.shape[1] % 2), axis=(0, 1))


def weak_object_transfer(pattern: IlluminationPattern, pupil: Pupil) -> TransferPair:
    """
    Absorption and phase transfer functions under the weak-object approximation.
    With G(u) = sum_i P*(u_i) P(u_i + u) and DC = sum_i |P(u_i)|^2:
    h_abs = -(G(u) + G*(-u)) / DC and h_ph = i (G(u) - G*(-u)) / DC.
    Args:
        pattern: Illumination pattern; LEDs are snapped to the pupil grid
        pupil: Pupil sampled on the measurement grid
    Returns:
        TransferPair
    Raises:
        PhysicsModelError: If no LED of the pattern falls inside the pupil
    """
    if len(pattern) == 0:
        raise PhysicsModelError("weak-object model requires brightfield source")
    mask = pupil.mask
    rows, cols = mask.shape
    center_row, center_col = pupil.grid.center

    correlation = np.zeros(mask.shape, dtype=np.complex128)
    dc = 0.0
    for u in pattern.leds:
        (shift_row, shift_col), _ = led_pixel_offset(u, pupil.grid.spacing)
        row, col = center_row + shift_row, center_col + shift_col
        if not (0 <= row < rows and 0 <= col < cols):
            continue
        weight = mask[row, col]
        if weight == 0:
            continue
        # rolled[u] = mask[u + k]
        correlation += np.conj(weight) * np.roll(mask, (-shift_row, -shift_col), axis=(0, 1))
        dc += float(np.abs(weight) ** 2)
    if dc == 0:
        raise PhysicsModelError(
            "weak-object model requires brightfield source",
            {"pattern": pattern.name},
        )
    mirrored = np.conj(_reflect(correlation))
    return TransferPair(
        h_abs=-(correlation + mirrored) / dc,
        h_ph=1j * (correlation - mirrored) / dc,
    )


def transfer_pairs_for(
    patterns: Sequence[IlluminationPattern],
    system: OpticalSystem,
    shape: tuple[int, int],
    pitch: float,
) -> list[TransferPair]:
    pupil = make_pupil(system, shape, pitch)
    return [weak_object_transfer(pattern, pupil) for pattern in patterns]
