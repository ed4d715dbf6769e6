from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError, PhysicsModelError, ShapeMismatchError
from lcnf_fpm.dpc.transfer import TransferPair
from lcnf_fpm.optics import forward_fft, inverse_fft


@dataclass(frozen=True)
class DpcResult:
    absorption: np.ndarray
    phase: np.ndarray
    absorption_spectrum: np.ndarray
    phase_spectrum: np.ndarray


def _check_inputs(images: Sequence[np.ndarray], transfer_pairs: Sequence[TransferPair]) -> None:
    if len(images) != len(transfer_pairs):
        raise ShapeMismatchError(
            f"{len(images)} images but {len(transfer_pairs)} transfer pairs"
        )
    if len(images) < 2:
        raise ConfigurationError(f"DPC needs at least two brightfield images, got {len(images)}")
    for image, pair in zip(images, transfer_pairs):
        if image.shape != pair.h_ph.shape:
            raise ShapeMismatchError(
                f"image {image.shape} does not match transfer function {pair.h_ph.shape}"
            )


def dpc_solve(
    bf_images: Sequence[np.ndarray],
    transfer_pairs: Sequence[TransferPair],
    tau1: float = 1e-3,
    tau2: float = 1e-3,
) -> DpcResult:
    """
    Joint Tikhonov estimate of absorption and phase from background-subtracted images.
    Every frequency solves the 2x2 normal equations
    [sum|Ha|^2 + tau1, sum Ha* Hp; sum Hp* Ha, sum|Hp|^2 + tau2] [M; Psi] = [sum Ha* D; sum Hp* D].
    Args:
        bf_images: Mean-normalised images with the background removed
        transfer_pairs: One TransferPair per image
        tau1: Absorption regulariser weight
        tau2: Phase regulariser weight
    Returns:
        DpcResult with real-space absorption and phase
    Raises:
        ConfigurationError: If a regulariser weight is not positive
    """
    if tau1 <= 0 or tau2 <= 0:
        raise ConfigurationError(f"DPC regularisers must be positive, got {tau1} and {tau2}")
    _check_inputs(bf_images, transfer_pairs)

    aa = np.full(transfer_pairs[0].h_abs.shape, tau1, dtype=np.complex128)
    pp = np.full_like(aa, tau2)
    ap = np.zeros_like(aa)
    rhs_a = np.zeros_like(aa)
    rhs_p = np.zeros_like(aa)
    for image, pair in zip(bf_images, transfer_pairs):
        spectrum = forward_fft(image)
        aa += np.abs(pair.h_abs) ** 2
        pp += np.abs(pair.h_ph) ** 2
        ap += np.conj(pair.h_abs) * pair.h_ph
        rhs_a += np.conj(pair.h_abs) * spectrum
        rhs_p += np.conj(pair.h_ph) * spectrum

    determinant = aa * pp - ap * np.conj(ap)
    absorption_spectrum = (pp * rhs_a - ap * rhs_p) / determinant
    phase_spectrum = (aa * rhs_p - np.conj(ap) * rhs_a) / determinant
    return DpcResult(
        absorption=np.real(inverse_fft(absorption_spectrum)),
        phase=np.real(inverse_fft(phase_spectrum)),
        absorption_spectrum=absorption_spectrum,
        phase_spectrum=phase_spectrum,
    )


def dpc_invert(
    bf_images: Sequence[np.ndarray],
    transfer_pairs: Sequence[TransferPair],
    tau1: float = 1e-3,
    tau2: float = 1e-3,
) -> np.ndarray:
    return dpc_solve(bf_images, transfer_pairs, tau1, tau2).phase


def dpc_from_intensities(
    bf_images: Sequence[np.ndarray],
    transfer_pairs: Sequence[TransferPair],
    tau1: float = 1e-3,
    tau2: float = 1e-3,
) -> DpcResult:
    """
    Divide raw intensities by their mean, subtract the unit background and invert.
    """
    normalized = []
    for index, image in enumerate(bf_images):
        mean = float(np.mean(image))
        if mean <= 0:
            raise PhysicsModelError(f"brightfield image {index} has no signal")
        normalized.append(image / mean - 1.0)
    result = dpc_solve(normalized, transfer_pairs, tau1, tau2)
    logger.debug(f"DPC phase range {result.phase.min():.3f} .. {result.phase.max():.3f} rad")
    return result


def dpc_residual(
    bf_spectra: Sequence[np.ndarray],
    transfer_pairs: Sequence[TransferPair],
    absorption_spectrum: np.ndarray,
    phase_spectrum: np.ndarray,
) -> float:
    """
    Relative misfit of the linear forward model against measured spectra.
    """
    misfit = 0.0
    energy = 0.0
    for spectrum, pair in zip(bf_spectra, transfer_pairs):
        predicted = pair.h_abs * absorption_spectrum + pair.h_ph * phase_spectrum
        misfit += float(np.sum(np.abs(spectrum - predicted) ** 2))
        energy += float(np.sum(np.abs(spectrum) ** 2))
    return float(np.sqrt(misfit / energy)) if energy > 0 else 0.0
