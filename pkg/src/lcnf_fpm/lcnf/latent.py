from dataclasses import dataclass
from typing import Optional

import numpy as np

from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.nn import functional as F
from lcnf_fpm.nn.modules import Mlp
from lcnf_fpm.nn.tensor import Tensor

LATENT_SPACING = 2.0


@dataclass(frozen=True)
class LatentGrid:
    """
    Encoder output with one latent vector per cell, stored channels-first as (D, H, W).
    Cell (i, j) sits at latent coordinate (-H + 1 + 2i, -W + 1 + 2j); the grid spans [-H, H] x [-W, W].
    Query coordinates are (row, col) pairs in these latent units.
    """

    features: Tensor

    def __post_init__(self) -> None:
        if self.features.data.ndim != 3:
            raise ShapeMismatchError(f"latent features must be (D, H, W), got {self.features.shape}")

    @property
    def depth(self) -> int:
        return self.features.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.features.shape[1], self.features.shape[2]

    @property
    def coord_range(self) -> tuple[tuple[float, float], tuple[float, float]]:
        rows, cols = self.shape
        return (-float(rows), float(rows)), (-float(cols), float(cols))

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = self.shape
        return latent_centers(rows), latent_centers(cols)

    def table(self) -> Tensor:
        """
        Latent vectors as rows of an (H * W, D) matrix in row-major cell order.
        """
        rows, cols = self.shape
        return F.reshape(F.transpose(self.features, (1, 2, 0)), (rows * cols, self.depth))


def latent_centers(size: int) -> np.ndarray:
    return -size + 1 + LATENT_SPACING * np.arange(size)


def pixel_center_coords(out_shape: tuple[int, int], latent_shape: tuple[int, int]) -> np.ndarray:
    """
    Centres of an out_shape pixel grid laid over the latent coordinate range.
    Returns:
        Array of shape (rows * cols, 2) in row-major pixel order
    """
    axes = [
        -extent + (np.arange(count) + 0.5) * (2.0 * extent / count)
        for count, extent in zip(out_shape, latent_shape)
    ]
    row_grid, col_grid = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.stack([row_grid.ravel(), col_grid.ravel()], axis=1)


def query_cell(out_shape: tuple[int, int], latent_shape: tuple[int, int]) -> np.ndarray:
    return np.array([2.0 * latent_shape[0] / out_shape[0], 2.0 * latent_shape[1] / out_shape[1]])


def nearest_latent_index(coords: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """
    Index of the closest latent centre per axis; midpoints go to the lower index.
    """
    coords = np.atleast_2d(coords)
    limits = np.asarray(shape)
    index = np.ceil((coords + limits) / LATENT_SPACING).astype(np.int64) - 1
    return np.clip(index, 0, limits - 1)


def select_latent(grid: LatentGrid, coords: np.ndarray) -> tuple[Tensor, np.ndarray, np.ndarray]:
    """
    Nearest latent vector for each query coordinate.
    Args:
        grid: Latent grid
        coords: (n, 2) query coordinates
    Returns:
        The selected vectors (n, D), their centres (n, 2) and the offsets c - v (n, 2)
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    rows, cols = grid.shape
    index = nearest_latent_index(coords, grid.shape)
    centers = np.stack([latent_centers(rows)[index[:, 0]], latent_centers(cols)[index[:, 1]]], axis=1)
    vectors = F.gather_rows(grid.table(), index[:, 0] * cols + index[:, 1])
    return vectors, centers, coords - centers


def unfold_features(grid: LatentGrid) -> LatentGrid:
    return LatentGrid(F.unfold3x3(grid.features))


@dataclass(frozen=True)
class EnsembleCorners:
    """
    The four latent vectors surrounding each query, corner-major: t = 2a + b for a, b in {0, 1}.
    """

    flat_index: np.ndarray  # (4, n) row-major cell index after mirror padding
    offsets: np.ndarray  # (4, n, 2) c minus the (virtual) corner centre
    weights: np.ndarray  # (4, n), sums to 1 over the corners


def _mirror(index: np.ndarray, size: int) -> np.ndarray:
    # One-cell symmetric padding: -1 -> 0 and size -> size - 1.
    return np.clip(index, 0, size - 1)


def ensemble_corners(coords: np.ndarray, shape: tuple[int, int]) -> EnsembleCorners:
    """
    Surrounding latent centres of each query and their area weights.
    A corner's weight is the area of the rectangle spanned by the query and the diagonally
    opposite corner, divided by the total of the four areas.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    limits = np.asarray(shape)
    low = np.floor((coords - (1.0 - limits)) / LATENT_SPACING).astype(np.int64)
    low = np.clip(low, -1, limits - 1)

    corner_index = []
    corner_offsets = []
    for a in (0, 1):
        for b in (0, 1):
            index = low + np.array([a, b])
            centers = 1.0 - limits + LATENT_SPACING * index
            corner_offsets.append(coords - centers)
            corner_index.append(
                _mirror(index[:, 0], shape[0]) * shape[1] + _mirror(index[:, 1], shape[1])
            )
    offsets = np.stack(corner_offsets)
    areas = np.abs(offsets[::-1, :, 0] * offsets[::-1, :, 1])
    weights = areas / areas.sum(axis=0, keepdims=True)
    return EnsembleCorners(flat_index=np.stack(corner_index), offsets=offsets, weights=weights)


def _decoder_input(vectors: Tensor, offsets: np.ndarray, cell: Optional[np.ndarray]) -> Tensor:
    parts = [vectors, Tensor(offsets)]
    if cell is not None:
        parts.append(Tensor(np.broadcast_to(cell, offsets.shape).copy()))
    return F.concat(parts, axis=1)


def decode_point(
    mlp: Mlp, vectors: Tensor, offsets: np.ndarray, cell: Optional[np.ndarray] = None
) -> Tensor:
    """
    Decode one scalar per query from [latent vector, offset, cell].
    Args:
        mlp: Decoder with a single output unit
        vectors: (n, D') latent vectors, unfolded when feature unfolding is on
        offsets: (n, 2) query offsets from the vector centres in latent units
        cell: (2,) or (n, 2) query pixel size in latent units, None when cell decoding is off
    Returns:
        Tensor of shape (n,)
    Raises:
        ShapeMismatchError: If the assembled input does not match the decoder's input width
    """
    inputs = _decoder_input(vectors, np.atleast_2d(offsets), cell)
    expected = mlp.layers[0].weight.shape[1]
    if inputs.shape[1] != expected:
        raise ShapeMismatchError(f"decoder expects {expected} input features, got {inputs.shape[1]}")
    output = mlp(inputs)
    return F.reshape(output, (output.shape[0],))


def decode_ensemble(
    mlp: Mlp, grid: LatentGrid, coords: np.ndarray, cell: Optional[np.ndarray] = None
) -> Tensor:
    corners = ensemble_corners(coords, grid.shape)
    count = corners.weights.shape[1]
    vectors = F.gather_rows(grid.table(), corners.flat_index.reshape(-1))
    cell_rows = None if cell is None else np.broadcast_to(cell, (4 * count, 2))
    values = decode_point(mlp, vectors, corners.offsets.reshape(4 * count, 2), cell_rows)
    weighted = F.mul_const(F.reshape(values, (4, count)), corners.weights)
    return F.sum(weighted, axis=0)
