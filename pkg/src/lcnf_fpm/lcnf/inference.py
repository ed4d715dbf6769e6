from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.ndimage import zoom

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.lcnf.latent import LatentGrid, pixel_center_coords, query_cell
from lcnf_fpm.lcnf.model import LcnfModel
from lcnf_fpm.nn.tensor import no_grad

DPC_CHANNEL = 5


def _query_chunk(model: LcnfModel, grid: LatentGrid, coords: np.ndarray, cell: np.ndarray) -> np.ndarray:
    # no_grad is per thread, so every worker enters it itself.
    with no_grad():
        return model.query(grid, coords, cell).data


def infer_normalized(
    model: LcnfModel,
    inputs: np.ndarray,
    out_shape: tuple[int, int],
    chunk: Optional[int] = None,
    jobs: int = 1,
) -> np.ndarray:
    """
    Decode the network output on an arbitrary pixel grid, in normalised target units.
    Args:
        model: Trained model
        inputs: (6, h, w) network input
        out_shape: Output pixel grid, independent of the training scale
        chunk: Queries per decoder call, defaults to the config's inference_chunk
        jobs: Worker threads over chunks
    Returns:
        Array of shape out_shape
    """
    if out_shape[0] < 1 or out_shape[1] < 1:
        raise ConfigurationError(f"out_shape must be positive, got {out_shape}")
    chunk = chunk or model.config.inference_chunk
    with no_grad():
        grid = model.decoder_grid(inputs)
    coords = pixel_center_coords(out_shape, grid.shape)
    cell = query_cell(out_shape, grid.shape)
    batches = [coords[start : start + chunk] for start in range(0, len(coords), chunk)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            values = list(executor.map(lambda part: _query_chunk(model, grid, part, cell), batches))
    else:
        values = [_query_chunk(model, grid, part, cell) for part in batches]
    logger.debug(f"Decoded {len(coords)} queries in {len(batches)} chunks for {grid.shape} -> {out_shape}")
    return np.concatenate(values).reshape(out_shape)


def infer_grid(
    model: LcnfModel,
    inputs: np.ndarray,
    out_shape: tuple[int, int],
    chunk: Optional[int] = None,
    jobs: int = 1,
) -> np.ndarray:
    """
    Phase map in radians on an arbitrary output grid.
    """
    normalized = infer_normalized(model, inputs, out_shape, chunk, jobs)
    return normalized * model.config.phase_scale + model.config.phase_offset


def bicubic_dpc_baseline(
    inputs: np.ndarray,
    scale: int,
    phase_scale: float,
    phase_offset: float,
    mean_phase: Optional[float] = None,
) -> np.ndarray:
    """
    Cubic-spline upsampling of the DPC channel, expressed in normalised target units.
    DPC recovers no constant phase term, so mean_phase (radians) can be supplied to place it.
    """
    upsampled = zoom(inputs[DPC_CHANNEL], scale, order=3)
    if mean_phase is not None:
        upsampled = upsampled - upsampled.mean() + mean_phase
    return np.clip((upsampled - phase_offset) / phase_scale, 0.0, 1.0)
