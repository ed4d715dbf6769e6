from typing import Optional, Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError, ShapeMismatchError
from lcnf_fpm.core.schemas import PreprocessConfig
from lcnf_fpm.optics import forward_fft, inverse_fft
from lcnf_fpm.preprocess.morphology import remove_background


def _as_stack(images: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    stack = np.asarray(images, dtype=np.float64)
    if stack.ndim == 2:
        stack = stack[None]
    if stack.ndim != 3:
        raise ShapeMismatchError(f"expected an image or a stack of images, got shape {stack.shape}")
    return stack


def ensemble_psd(images: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """
    Mean |spectrum|^2 over a set of equally shaped images, DC-centred.
    """
    stack = _as_stack(images)
    return np.mean(np.abs(forward_fft(stack)) ** 2, axis=0)


def power_law_psd(shape: tuple[int, int], exponent: float = 2.0) -> np.ndarray:
    """
    Isotropic 1/f^exponent reference spectrum in pixel-index units, 1 at DC and its neighbours.
    """
    rows, cols = shape
    fy = np.fft.fftshift(np.fft.fftfreq(rows)) * rows
    fx = np.fft.fftshift(np.fft.fftfreq(cols)) * cols
    radius = np.hypot(fy[:, None], fx[None, :])
    return 1.0 / np.maximum(radius, 1.0) ** exponent


def _max_normalize(image: np.ndarray) -> np.ndarray:
    # negative ringing from the spectral reshaping is clipped before dividing by the peak
    clipped = np.clip(image, 0.0, None)
    peak = clipped.max()
    if peak == 0:
        return np.zeros_like(image)
    return clipped / peak


def psd_match(images: Sequence[np.ndarray] | np.ndarray, reference_psd: np.ndarray) -> np.ndarray:
    """
    Reshape the ensemble power spectrum of `images` onto `reference_psd`.
    Each spectrum is multiplied by sqrt(reference / source) where source is the ensemble PSD,
    then every image is clipped at zero and divided by its maximum.
    Args:
        images: One image or a stack sharing the reference shape
        reference_psd: DC-centred target PSD, non-negative
    Returns:
        Matched images with the input's dimensionality
    Raises:
        ConfigurationError: If the source PSD vanishes where the reference does not
    """
    single = np.asarray(images).ndim == 2
    stack = _as_stack(images)
    if stack.shape[1:] != reference_psd.shape:
        raise ShapeMismatchError(
            f"reference PSD {reference_psd.shape} does not match images {stack.shape[1:]}"
        )
    if np.any(reference_psd < 0):
        raise ConfigurationError("reference PSD must be non-negative")

    spectra = forward_fft(stack)
    source = np.mean(np.abs(spectra) ** 2, axis=0)
    empty = (source <= 0) & (reference_psd > 0)
    if empty.any():
        rows, cols = np.nonzero(empty)
        frequencies = [(int(r), int(c)) for r, c in zip(rows[:10], cols[:10])]
        raise ConfigurationError(
            f"source PSD is zero at {int(empty.sum())} frequencies with non-zero reference, e.g. {frequencies}",
            {"frequencies": frequencies},
        )
    ratio = np.zeros_like(source)
    valid = source > 0
    ratio[valid] = np.sqrt(reference_psd[valid] / source[valid])
    matched = np.real(inverse_fft(spectra * ratio))
    out = np.stack([_max_normalize(image) for image in matched])
    return out[0] if single else out


def condition_natural_image(
    image: np.ndarray,
    config: PreprocessConfig,
    reference_psd: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Simulated-data chain turning a natural image into a phase map in radians.
    Args:
        image: Grey-scale image, any range
        config: Preprocessing constants (sim kernel, threshold, phase scale and offset)
        reference_psd: Target PSD; a 1/f^2 power law when omitted
    Returns:
        Phase in [sim_phase_offset, sim_phase_offset + sim_phase_scale], reaching the upper bound
    """
    image = np.asarray(image, dtype=np.float64)
    span = image.max() - image.min()
    unit = (image - image.min()) / span if span > 0 else np.zeros_like(image)
    flattened = remove_background(unit, config.open_kernel_sim)
    thresholded = np.clip(flattened, 0.0, config.sim_value_threshold) / config.sim_value_threshold
    if reference_psd is None:
        reference_psd = power_law_psd(image.shape)
    if not np.any(thresholded):
        logger.warning("conditioned image is blank; skipping PSD matching")
        matched = thresholded
    else:
        matched = psd_match(thresholded, reference_psd)
    return matched * config.sim_phase_scale + config.sim_phase_offset
