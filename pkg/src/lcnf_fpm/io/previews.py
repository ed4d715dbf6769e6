from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.image as mpimg  # noqa: E402
import numpy as np  # noqa: E402

PHASE_COLORMAP = "viridis"
SPECTRUM_COLORMAP = "magma"


def _save(path: str | Path, values: np.ndarray, cmap: str, vmin: float, vmax: float) -> Path:
    if vmax <= vmin:
        vmax = vmin + 1.0
    mpimg.imsave(Path(path), np.asarray(values, dtype=np.float64), cmap=cmap, vmin=vmin, vmax=vmax)
    return Path(path)


def save_phase_preview(path: str | Path, phase: np.ndarray) -> Path:
    """
    8-bit PNG of a phase map stretched over its own range.
    """
    return _save(path, phase, PHASE_COLORMAP, float(np.min(phase)), float(np.max(phase)))


def save_spectrum_preview(path: str | Path, spectrum: np.ndarray) -> Path:
    magnitude = np.log10(1.0 + np.abs(spectrum))
    return _save(path, magnitude, SPECTRUM_COLORMAP, 0.0, float(magnitude.max()))
