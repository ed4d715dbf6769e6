from typing import Optional

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.enums import IlluminationKind
from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.core.schemas import PreprocessConfig
from lcnf_fpm.dpc import dpc_from_intensities, transfer_pairs_for
from lcnf_fpm.preprocess.morphology import morphological_open
from lcnf_fpm.simulation.forward import MeasurementSet

CHANNEL_ORDER = ("BF1", "BF2", "DF1", "DF2", "DF3", "DPC")


def clip_dynamic_range(image: np.ndarray, fraction: float) -> np.ndarray:
    """
    Clamp the darkest and brightest `fraction` of pixels to the corresponding quantiles.
    """
    if fraction == 0:
        return image.copy()
    low, high = np.quantile(image, [fraction, 1.0 - fraction])
    return np.clip(image, low, high)


def normalize_intensity(image: np.ndarray, mean: Optional[float] = None) -> np.ndarray:
    mean = float(np.mean(image)) if mean is None else mean
    if mean <= 0:
        logger.warning("intensity image has zero mean; leaving it unnormalised")
        return image.copy()
    return image / mean


def prepare_network_inputs(measurements: MeasurementSet, config: PreprocessConfig) -> np.ndarray:
    """
    Six-channel network input from two brightfield and three darkfield images.
    Each intensity is clipped, divided by its mean and has its opened background removed.
    With per_image_mean off every image is divided by the mean of the clipped brightfield pair.
    The DPC channel comes from the two clipped, mean-normalised brightfield images and keeps
    its radian scale.
    Args:
        measurements: Multiplexed measurement set with patterns in BF, BF, DF, DF, DF order
        config: Preprocessing constants
    Returns:
        Array of shape (6, rows, cols) in the order BF1, BF2, DF1, DF2, DF3, DPC
    Raises:
        ShapeMismatchError: If the set does not hold 2 brightfield and 3 darkfield images
    """
    bright = measurements.of_kind(IlluminationKind.BRIGHTFIELD)
    dark = measurements.of_kind(IlluminationKind.DARKFIELD)
    if len(bright) != 2 or len(dark) != 3:
        raise ShapeMismatchError(
            f"expected 2 brightfield and 3 darkfield images, got {len(bright)} and {len(dark)}"
        )

    clipped = {
        index: clip_dynamic_range(measurements.images[index], config.clip_fraction) for index in bright + dark
    }
    shared_mean = None if config.per_image_mean else float(np.mean([clipped[index] for index in bright]))
    normalized = {}
    channels = []
    for index in bright + dark:
        normalized[index] = normalize_intensity(clipped[index], shared_mean)
        background = morphological_open(normalized[index], config.open_kernel_lr)
        channels.append(normalized[index] - background)

    pairs = transfer_pairs_for(
        [measurements.patterns[index] for index in bright],
        measurements.system,
        measurements.shape,
        measurements.pitch,
    )
    dpc = dpc_from_intensities(
        [normalized[index] for index in bright],
        pairs,
        config.dpc_tau_absorption,
        config.dpc_tau_phase,
    )
    channels.append(dpc.phase)
    return np.stack(channels)
