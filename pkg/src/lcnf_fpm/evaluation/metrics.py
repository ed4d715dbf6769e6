from typing import Optional

import numpy as np
from scipy.ndimage import correlate

from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.core.schemas import MetricReport

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
# A spectral component counts toward FM when it exceeds this fraction of the peak magnitude.
FM_THRESHOLD = 1e-3


def _check_pair(prediction: np.ndarray, reference: np.ndarray) -> None:
    if prediction.shape != reference.shape:
        raise ShapeMismatchError(f"prediction {prediction.shape} and reference {reference.shape} differ")


def _data_range(reference: np.ndarray) -> float:
    spread = float(np.max(reference) - np.min(reference))
    return spread if spread > 0 else 1.0


def mse(prediction: np.ndarray, reference: np.ndarray) -> float:
    _check_pair(prediction, reference)
    return float(np.mean((np.asarray(prediction, np.float64) - np.asarray(reference, np.float64)) ** 2))


def psnr(prediction: np.ndarray, reference: np.ndarray) -> float:
    """
    Peak signal-to-noise ratio in dB against the reference's dynamic range.
    Identical images give +inf.
    """
    error = mse(prediction, reference)
    if error == 0:
        return float("inf")
    return float(10.0 * np.log10(_data_range(reference) ** 2 / error))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    axis = np.arange(size) - (size - 1) / 2.0
    profile = np.exp(-(axis**2) / (2.0 * sigma**2))
    window = np.outer(profile, profile)
    return window / window.sum()


def ssim(prediction: np.ndarray, reference: np.ndarray) -> float:
    """
    Mean structural similarity over every full 11x11 Gaussian window.
    Args:
        prediction: Estimated image
        reference: Reference image; its range sets the stabilising constants
    Returns:
        Mean local SSIM
    Raises:
        ShapeMismatchError: If the shapes differ or the images are smaller than the window
    """
    _check_pair(prediction, reference)
    if min(reference.shape) < SSIM_WINDOW:
        raise ShapeMismatchError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {reference.shape}")
    x = np.asarray(prediction, dtype=np.float64)
    y = np.asarray(reference, dtype=np.float64)
    window = gaussian_window()
    half = SSIM_WINDOW // 2
    valid = (slice(half, -half), slice(half, -half))

    def local_mean(values: np.ndarray) -> np.ndarray:
        return correlate(values, window, mode="reflect")[valid]

    mu_x, mu_y = local_mean(x), local_mean(y)
    var_x = local_mean(x * x) - mu_x * mu_x
    var_y = local_mean(y * y) - mu_y * mu_y
    cov = local_mean(x * y) - mu_x * mu_y
    data_range = _data_range(y)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    numerator = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(numerator / denominator))


def frequency_measure(image: np.ndarray, threshold: float = FM_THRESHOLD) -> float:
    magnitude = np.abs(np.fft.fftshift(np.fft.fft2(image)))
    peak = magnitude.max()
    if peak == 0:
        return 0.0
    return float(np.count_nonzero(magnitude > peak * threshold) / magnitude.size)


def background_std(image: np.ndarray, region: tuple[int, int, int, int]) -> float:
    """
    Standard deviation inside a blank (top, left, height, width) region.
    """
    top, left, height, width = region
    patch = image[top : top + height, left : left + width]
    if patch.shape != (height, width):
        raise ShapeMismatchError(f"region {region} leaves the {image.shape} image")
    return float(np.std(patch))


def evaluate(
    prediction: np.ndarray,
    reference: np.ndarray,
    pred_id: str = "",
    ref_id: str = "",
    units: str = "normalized",
    config_hash: Optional[str] = None,
) -> MetricReport:
    return MetricReport(
        mse=mse(prediction, reference),
        psnr_db=psnr(prediction, reference),
        ssim=float(np.clip(ssim(prediction, reference), -1.0, 1.0)),
        fm=frequency_measure(prediction),
        pred_id=pred_id,
        ref_id=ref_id,
        units=units,  # type: ignore[arg-type]
        config_hash=config_hash or "",
    )
