import numpy as np
from scipy.ndimage import grey_opening

from lcnf_fpm.core.exceptions import ConfigurationError


def morphological_open(image: np.ndarray, kernel: int) -> np.ndarray:
    """
    Grey-scale opening (erosion then dilation) with a square structuring element.
    Borders replicate the edge pixels, which keeps the operator anti-extensive and idempotent.
    Args:
        image: Real matrix
        kernel: Odd side length of the structuring element, at least 3
    Returns:
        Background estimate, pointwise <= image
    Raises:
        ConfigurationError: If the kernel is even, below 3, or larger than the image
    """
    if kernel < 3 or kernel % 2 == 0:
        raise ConfigurationError(f"opening kernel must be odd and >= 3, got {kernel}")
    if kernel > min(image.shape):
        raise ConfigurationError(
            f"opening kernel {kernel} is larger than the {image.shape} image",
            {"kernel": kernel, "shape": list(image.shape)},
        )
    return grey_opening(image, size=(kernel, kernel), mode="nearest")


def remove_background(image: np.ndarray, kernel: int) -> np.ndarray:
    return image - morphological_open(image, kernel)
