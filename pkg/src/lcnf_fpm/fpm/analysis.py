from typing import Optional

import numpy as np

from lcnf_fpm.core.schemas import OpticalSystem
from lcnf_fpm.fpm.solver import FpmState
from lcnf_fpm.optics import forward_fft, inverse_fft, make_frequency_axes


def align_global_phase(estimate: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """
    Multiply estimate by the constant phase factor that best matches reference.
    """
    inner = np.vdot(estimate, reference)
    if inner == 0:
        return estimate.copy()
    return estimate * np.exp(1j * np.angle(inner))


def relative_error(estimate: np.ndarray, reference: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    """
    ||aligned(estimate) - reference|| / ||reference||, restricted to mask when given.
    """
    if mask is not None:
        estimate = estimate * mask
        reference = reference * mask
    difference = align_global_phase(estimate, reference) - reference
    norm = float(np.linalg.norm(reference))
    return float(np.linalg.norm(difference)) / norm if norm > 0 else float(np.linalg.norm(difference))


def band_limit(data: np.ndarray, pitch: float, cutoff: float) -> np.ndarray:
    """
    Keep only spatial frequencies with |u| <= cutoff.
    """
    grid = make_frequency_axes(data.shape, pitch)
    return inverse_fft(forward_fft(data) * (grid.radius <= cutoff * (1 + 1e-12)))


def spectrum_support_fraction(state: FpmState, system: OpticalSystem, synthetic: float) -> float:
    """
    Share of spectral energy beyond the objective passband but inside the synthetic-NA disk.
    """
    grid = make_frequency_axes(state.object_spectrum.shape, state.pitch)
    energy = np.abs(state.object_spectrum) ** 2
    inner = system.cutoff_freq * (1 + 1e-12)
    outer = synthetic / system.wavelength_um * (1 + 1e-12)
    band = (grid.radius > inner) & (grid.radius <= outer)
    total = float(energy.sum())
    return float(energy[band].sum() / total) if total > 0 else 0.0
