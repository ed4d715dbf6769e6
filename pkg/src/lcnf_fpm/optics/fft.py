from dataclasses import dataclass
from functools import cached_property

import numpy as np

from lcnf_fpm.core.exceptions import ConfigurationError, GridSupportError, ShapeMismatchError


def forward_fft(data: np.ndarray) -> np.ndarray:
    """
    Unnormalised 2-D DFT returning a DC-centred spectrum.
    """
    return np.fft.fftshift(np.fft.fft2(data), axes=(-2, -1))


def inverse_fft(spectrum: np.ndarray) -> np.ndarray:
    """
    Inverse of forward_fft, carrying the 1/(rows*cols) factor.
    """
    return np.fft.ifft2(np.fft.ifftshift(spectrum, axes=(-2, -1)))


@dataclass(frozen=True)
class FrequencyGrid:
    """
    DC-centred spatial-frequency axes of a sampled grid (inverse micrometres).
    fy runs along rows, fx along columns.
    """

    fy: np.ndarray
    fx: np.ndarray
    pitch: float

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.fy), len(self.fx)

    @property
    def spacing(self) -> tuple[float, float]:
        rows, cols = self.shape
        return 1.0 / (rows * self.pitch), 1.0 / (cols * self.pitch)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.pitch

    @property
    def center(self) -> tuple[int, int]:
        rows, cols = self.shape
        return rows // 2, cols // 2

    @cached_property
    def uy(self) -> np.ndarray:
        return np.broadcast_to(self.fy[:, None], self.shape)

    @cached_property
    def ux(self) -> np.ndarray:
        return np.broadcast_to(self.fx[None, :], self.shape)

    @cached_property
    def radius(self) -> np.ndarray:
        return np.hypot(self.uy, self.ux)


def make_frequency_axes(shape: tuple[int, int], pitch: float) -> FrequencyGrid:
    """
    Build the frequency axes of a rows x cols grid sampled at pitch.
    Args:
        shape: Grid shape (rows, cols), at least 2x2
        pitch: Sampling pitch in micrometres
    Returns:
        FrequencyGrid with DC at index (rows // 2, cols // 2)
    Raises:
        ConfigurationError: If the pitch is not positive or the grid is smaller than 2x2
    """
    if pitch <= 0:
        raise ConfigurationError(f"pitch must be positive, got {pitch}", {"pitch": pitch})
    rows, cols = shape
    if rows < 2 or cols < 2:
        raise ConfigurationError(f"frequency grid needs at least 2x2 samples, got {shape}")
    fy = np.fft.fftshift(np.fft.fftfreq(rows, d=pitch))
    fx = np.fft.fftshift(np.fft.fftfreq(cols, d=pitch))
    return FrequencyGrid(fy=fy, fx=fx, pitch=float(pitch))


@dataclass(frozen=True)
class ComplexField2D:
    data: np.ndarray
    pitch: float

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ShapeMismatchError(f"field must be a non-empty matrix, got shape {self.data.shape}")
        if self.pitch <= 0:
            raise ConfigurationError(f"pitch must be positive, got {self.pitch}")
        object.__setattr__(self, "data", np.asarray(self.data, dtype=np.complex128))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]

    def spectrum(self) -> np.ndarray:
        return forward_fft(self.data)

    def intensity(self) -> np.ndarray:
        return np.abs(self.data) ** 2

    def amplitude(self) -> np.ndarray:
        return np.abs(self.data)

    def phase(self) -> np.ndarray:
        return np.angle(self.data)

    def frequency_grid(self) -> FrequencyGrid:
        return make_frequency_axes(self.shape, self.pitch)

    @classmethod
    def from_spectrum(cls, spectrum: np.ndarray, pitch: float) -> "ComplexField2D":
        return cls(data=inverse_fft(spectrum), pitch=pitch)


def _window_bounds(
    full_shape: tuple[int, int], center_offset: tuple[int, int], shape: tuple[int, int]
) -> tuple[slice, slice]:
    rows, cols = full_shape
    win_rows, win_cols = shape
    top = rows // 2 + center_offset[0] - win_rows // 2
    left = cols // 2 + center_offset[1] - win_cols // 2
    if top < 0 or left < 0 or top + win_rows > rows or left + win_cols > cols:
        raise GridSupportError(
            f"a {shape} window offset by {center_offset} does not fit the {full_shape} spectrum",
            {"offset": list(center_offset), "window": list(shape), "grid": list(full_shape)},
        )
    return slice(top, top + win_rows), slice(left, left + win_cols)


def crop_spectrum(
    spectrum: np.ndarray, center_offset: tuple[int, int], shape: tuple[int, int]
) -> np.ndarray:
    """
    Cut a window out of a DC-centred spectrum.
    Args:
        spectrum: Large DC-centred spectrum
        center_offset: (row, col) pixel offset of the window centre from the spectrum DC
        shape: Window shape; its DC lands at (rows // 2, cols // 2)
    Returns:
        A copy of the window
    Raises:
        GridSupportError: If the window leaves the spectrum
    """
    row_slice, col_slice = _window_bounds(spectrum.shape, center_offset, shape)
    return spectrum[row_slice, col_slice].copy()


def embed_spectrum(
    window: np.ndarray,
    full_shape: tuple[int, int],
    center_offset: tuple[int, int] = (0, 0),
    target: np.ndarray | None = None,
) -> np.ndarray:
    """
    Place a window back into a larger DC-centred spectrum.
    When target is given the window is added to it in place, otherwise into zeros.
    """
    row_slice, col_slice = _window_bounds(full_shape, center_offset, window.shape)
    out = np.zeros(full_shape, dtype=np.complex128) if target is None else target
    out[row_slice, col_slice] += window
    return out
