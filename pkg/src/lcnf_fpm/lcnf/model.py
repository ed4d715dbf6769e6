from typing import Optional

import numpy as np

from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.core.schemas import LcnfConfig
from lcnf_fpm.lcnf.latent import (
    LatentGrid,
    decode_ensemble,
    decode_point,
    select_latent,
    unfold_features,
)
from lcnf_fpm.nn import functional as F
from lcnf_fpm.nn.modules import Conv2d3x3, Mlp, Module, ResidualBlock
from lcnf_fpm.nn.tensor import Tensor

# Input channel ranges of the three encoders: (BF1, BF2), (DF1, DF2, DF3), (DPC).
ENCODER_GROUPS = ((0, 2), (2, 5), (5, 6))


class Encoder(Module):
    """
    Head conv, residual body and tail conv with a long skip from the head output.
    No pooling, so the lateral size of the input is kept.
    """

    def __init__(
        self, in_channels: int, channels: int, blocks: int, res_scale: float, rng: np.random.Generator
    ):
        self.head = Conv2d3x3(in_channels, channels, rng)
        self.blocks = [ResidualBlock(channels, rng, res_scale) for _ in range(blocks)]
        self.tail = Conv2d3x3(channels, channels, rng)

    def __call__(self, x: Tensor) -> Tensor:
        head = self.head(x)
        body = head
        for block in self.blocks:
            body = block(body)
        return F.add(self.tail(body), head)


class LcnfModel(Module):
    """
    Three measurement encoders feeding a shared latent grid and a coordinate MLP decoder.
    """

    def __init__(self, config: LcnfConfig, rng: Optional[np.random.Generator] = None):
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.config = config
        self.encoders = [
            Encoder(stop - start, config.encoder_channels, config.residual_blocks, config.res_scale, rng)
            for start, stop in ENCODER_GROUPS
        ]
        sizes = [config.mlp_input_dim] + [config.mlp_hidden] * (config.mlp_layers - 1) + [1]
        self.mlp = Mlp(sizes, rng)

    def encode(self, inputs: np.ndarray) -> LatentGrid:
        """
        Args:
            inputs: (6, h, w) stack ordered BF1, BF2, DF1, DF2, DF3, DPC
        Returns:
            Latent grid of depth 3 * encoder_channels over the same h x w cells
        Raises:
            ShapeMismatchError: On a wrong channel count
        """
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 3 or inputs.shape[0] != ENCODER_GROUPS[-1][1]:
            raise ShapeMismatchError(
                f"the encoders take {ENCODER_GROUPS[-1][1]} input channels, got shape {inputs.shape}"
            )
        outputs = [
            encoder(Tensor(inputs[start:stop]))
            for encoder, (start, stop) in zip(self.encoders, ENCODER_GROUPS)
        ]
        return LatentGrid(F.concat(outputs, axis=0))

    def decoder_grid(self, inputs: np.ndarray) -> LatentGrid:
        grid = self.encode(inputs)
        return unfold_features(grid) if self.config.feature_unfold else grid

    def query(self, grid: LatentGrid, coords: np.ndarray, cell: np.ndarray) -> Tensor:
        """
        Decode phase values at latent coordinates from a decoder grid.
        Args:
            grid: Output of decoder_grid
            coords: (n, 2) query coordinates in latent units
            cell: (2,) query pixel size in latent units
        Returns:
            Tensor of shape (n,)
        """
        cell_input = cell if self.config.cell_decode else None
        if self.config.local_ensemble:
            return decode_ensemble(self.mlp, grid, coords, cell_input)
        vectors, _, offsets = select_latent(grid, coords)
        return decode_point(self.mlp, vectors, offsets, cell_input)
