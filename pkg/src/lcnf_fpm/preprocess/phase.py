import numpy as np
from scipy.fft import dctn, idctn

from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.core.schemas import PreprocessConfig
from lcnf_fpm.preprocess.morphology import remove_background


def wrap_phase(phase: np.ndarray) -> np.ndarray:
    """
    Wrap into (-pi, pi].
    """
    wrapped = np.mod(phase + np.pi, 2 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def _poisson_scale(shape: tuple[int, int]) -> np.ndarray:
    rows, cols = shape
    i, j = np.ogrid[0:rows, 0:cols]
    scale = 2 * (np.cos(np.pi * i / rows) + np.cos(np.pi * j / cols) - 2)
    scale[0, 0] = 1.0
    return scale


def unwrap_phase(wrapped: np.ndarray) -> np.ndarray:
    """
    Unweighted least-squares unwrapping through a Neumann Poisson solve in the cosine domain.
    The result is defined up to an additive constant; its mean is zero.
    """
    dx = wrap_phase(np.diff(wrapped, axis=1))
    dy = wrap_phase(np.diff(wrapped, axis=0))
    rho = np.diff(dx, axis=1, prepend=0, append=0) + np.diff(dy, axis=0, prepend=0, append=0)

    spectrum = dctn(rho, norm="ortho") / _poisson_scale(wrapped.shape)
    spectrum[0, 0] = 0.0
    return idctn(spectrum, norm="ortho")


def normalize_phase_target(phase: np.ndarray, clip_max: float) -> np.ndarray:
    if clip_max <= 0:
        raise ConfigurationError(f"clip_max must be positive, got {clip_max}")
    return np.clip(phase, 0.0, clip_max) / clip_max


def prepare_phase_target(phase: np.ndarray, config: PreprocessConfig) -> np.ndarray:
    """
    Ground-truth chain for reconstructed phase maps.
    Args:
        phase: Wrapped phase from an FPM reconstruction (radians)
        config: Preprocessing constants
    Returns:
        Target in [0, 1]: unwrap, subtract the opened background, clip to [0, phase_clip_max], scale
    """
    unwrapped = unwrap_phase(phase)
    flattened = remove_background(unwrapped, config.open_kernel_hr)
    return normalize_phase_target(flattened, config.phase_clip_max)


def center_crop(image: np.ndarray, size: int | tuple[int, int]) -> np.ndarray:
    rows, cols = (size, size) if isinstance(size, int) else size
    if rows > image.shape[0] or cols > image.shape[1]:
        raise ConfigurationError(f"cannot crop {(rows, cols)} out of {image.shape}")
    top = (image.shape[0] - rows) // 2
    left = (image.shape[1] - cols) // 2
    return image[top : top + rows, left : left + cols]
