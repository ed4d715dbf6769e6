from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError, CoverageError, ShapeMismatchError
from lcnf_fpm.core.schemas import TilePlan

MAX_LISTED_GAPS = 20


def _axis_origins(size: int, tile_size: int, stride: int) -> list[int]:
    origins = list(range(0, size - tile_size + 1, stride))
    if origins[-1] != size - tile_size:
        origins.append(size - tile_size)
    return origins


def fov_mask(region_shape: tuple[int, int], diameter: int) -> np.ndarray:
    rows, cols = region_shape
    r = np.arange(rows) + 0.5 - rows / 2.0
    c = np.arange(cols) + 0.5 - cols / 2.0
    return (r[:, None] ** 2 + c[None, :] ** 2) <= (diameter / 2.0) ** 2


def _touches_fov(origin: tuple[int, int], tile_size: int, region_shape: tuple[int, int], diameter: int) -> bool:
    center = np.array(region_shape) / 2.0
    nearest = np.clip(center, np.array(origin), np.array(origin) + tile_size)
    return float(np.hypot(*(nearest - center))) <= diameter / 2.0


def plan_tiles(
    region_shape: tuple[int, int],
    tile_size: int,
    overlap: int,
    fov_diameter: Optional[int] = None,
) -> TilePlan:
    """
    Lay square tiles over a region with at least `overlap` pixels shared between neighbours.
    The last tile on each axis is pushed back to end at the region edge.
    Args:
        region_shape: (rows, cols) of the region
        tile_size: Tile side in pixels
        overlap: Minimum shared width between neighbouring tiles
        fov_diameter: Optional diameter of a centred circular field of view; tiles outside it are dropped
    Returns:
        The tile plan
    """
    if tile_size > min(region_shape):
        raise ConfigurationError(f"tile {tile_size} does not fit the {region_shape} region")
    if not 0 <= overlap < tile_size:
        raise ConfigurationError(f"overlap must lie in [0, {tile_size}), got {overlap}")
    stride = tile_size - overlap
    origins = [
        (row, col)
        for row in _axis_origins(region_shape[0], tile_size, stride)
        for col in _axis_origins(region_shape[1], tile_size, stride)
    ]
    if fov_diameter is not None:
        origins = [o for o in origins if _touches_fov(o, tile_size, region_shape, fov_diameter)]
    return TilePlan(
        region_shape=region_shape,
        tile_size=tile_size,
        overlap=overlap,
        origins=origins,
        fov_diameter=fov_diameter,
    )


def _ramp(length: int, overlap: int, low_interior: bool, high_interior: bool) -> np.ndarray:
    profile = np.ones(length)
    if overlap == 0:
        return profile
    rise = (np.arange(overlap) + 1.0) / (overlap + 1.0)
    if low_interior:
        profile[:overlap] = np.minimum(profile[:overlap], rise)
    if high_interior:
        profile[-overlap:] = np.minimum(profile[-overlap:], rise[::-1])
    return profile


def tile_weights(plan: TilePlan, index: int) -> np.ndarray:
    """
    Separable linear ramp over the overlap margins of one tile.
    Edges lying on the region border keep weight 1.
    """
    row, col = plan.origins[index]
    size = plan.tile_size
    rows, cols = plan.region_shape
    vertical = _ramp(size, plan.overlap, row > 0, row + size < rows)
    horizontal = _ramp(size, plan.overlap, col > 0, col + size < cols)
    return np.outer(vertical, horizontal)


def _accumulated_weights(plan: TilePlan, jobs: int) -> tuple[list[np.ndarray], np.ndarray]:
    indices = range(len(plan.origins))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            weights = list(executor.map(lambda i: tile_weights(plan, i), indices))
    else:
        weights = [tile_weights(plan, i) for i in indices]
    total = np.zeros(plan.region_shape)
    size = plan.tile_size
    for (row, col), weight in zip(plan.origins, weights):
        total[row : row + size, col : col + size] += weight
    return weights, total


def _required_pixels(plan: TilePlan) -> np.ndarray:
    if plan.fov_diameter is None:
        return np.ones(plan.region_shape, dtype=bool)
    return fov_mask(plan.region_shape, plan.fov_diameter)


def normalized_tile_weights(plan: TilePlan, jobs: int = 1) -> list[np.ndarray]:
    """
    Per-tile blend weights divided by the accumulated weight, so they sum to 1 wherever covered.
    """
    weights, total = _accumulated_weights(plan, jobs)
    size = plan.tile_size
    return [
        weight / total[row : row + size, col : col + size]
        for (row, col), weight in zip(plan.origins, weights)
    ]


def stitch_alpha_blend(tiles: Sequence[np.ndarray], plan: TilePlan, jobs: int = 1) -> np.ndarray:
    """
    Blend overlapping tiles into one region with ramp weights normalised per pixel.
    Args:
        tiles: One array of shape (tile_size, tile_size) per plan origin
        plan: Tile placement
        jobs: Worker threads for the weight maps; accumulation stays in plan order
    Returns:
        The blended region; pixels outside every tile are 0
    Raises:
        ShapeMismatchError: If the tiles do not match the plan
        CoverageError: If a required pixel (inside the FOV when one is set) is not covered
    """
    if len(tiles) != len(plan.origins):
        raise ShapeMismatchError(f"plan has {len(plan.origins)} tiles, got {len(tiles)}")
    size = plan.tile_size
    for index, tile in enumerate(tiles):
        if tile.shape != (size, size):
            raise ShapeMismatchError(f"tile {index} is {tile.shape}, expected {(size, size)}")

    weights, total = _accumulated_weights(plan, jobs)
    gaps = np.argwhere((total == 0) & _required_pixels(plan))
    if len(gaps):
        raise CoverageError(
            f"{len(gaps)} pixels are not covered by any tile",
            {"uncovered": [tuple(int(v) for v in gap) for gap in gaps[:MAX_LISTED_GAPS]], "count": len(gaps)},
        )

    blended = np.zeros(plan.region_shape, dtype=np.result_type(*tiles))
    for (row, col), weight, tile in zip(plan.origins, weights, tiles):
        blended[row : row + size, col : col + size] += weight * tile
    covered = total > 0
    blended[covered] /= total[covered]
    logger.info(f"Stitched {len(tiles)} tiles into a {plan.region_shape} region")
    return blended
