import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ConfigurationError
from lcnf_fpm.core.schemas import LcnfConfig
from lcnf_fpm.io.checkpoint import Checkpoint, read_checkpoint, write_checkpoint
from lcnf_fpm.lcnf.inference import infer_normalized
from lcnf_fpm.lcnf.latent import pixel_center_coords, query_cell
from lcnf_fpm.lcnf.model import LcnfModel
from lcnf_fpm.nn import functional as F
from lcnf_fpm.nn.optim import AdamState, PlateauSchedule, adam_step, plateau_update
from lcnf_fpm.nn.tensor import backward
from lcnf_fpm.simulation.dataset import DatasetPair
from lcnf_fpm.utils import config_hash


@dataclass
class TrainingHistory:
    step_losses: list[float] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    learning_rates: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_loss: float = math.inf


def random_crop(pair: DatasetPair, crop: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """
    Matching crops of the input stack (crop x crop) and the target (crop * scale square).
    """
    rows, cols = pair.inputs.shape[1:]
    if crop > rows or crop > cols:
        raise ConfigurationError(f"crop {crop} exceeds the {rows}x{cols} input")
    top = int(rng.integers(0, rows - crop + 1))
    left = int(rng.integers(0, cols - crop + 1))
    s = pair.scale
    inputs = pair.inputs[:, top : top + crop, left : left + crop]
    target = pair.target[top * s : (top + crop) * s, left * s : (left + crop) * s]
    return inputs, target


def sample_targets(
    target: np.ndarray, latent_shape: tuple[int, int], count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw `count` target pixels without replacement.
    Returns:
        Their pixel-centre coordinates in latent units (count, 2) and their values (count,)
    """
    if count > target.size:
        raise ConfigurationError(f"cannot sample {count} coordinates from {target.size} target pixels")
    flat = rng.choice(target.size, size=count, replace=False)
    coords = pixel_center_coords(target.shape, latent_shape)[flat]  # type: ignore[arg-type]
    return coords, target.reshape(-1)[flat]


def train_step(
    model: LcnfModel,
    pairs: DatasetPair | Sequence[DatasetPair],
    optimizer: AdamState,
    rng: np.random.Generator,
    config: Optional[LcnfConfig] = None,
) -> float:
    """
    One optimizer step over a batch of random crops.
    Each crop is encoded, decoded at coords_per_step sampled target pixels and scored with L1.
    Gradients of the batch-mean loss are accumulated before a single Adam update.
    Args:
        model: Model to update in place
        pairs: One pair or a batch of pairs
        optimizer: Adam state matching model.parameters()
        rng: Source of crops and coordinates
        config: Sampling settings, defaults to the model's config
    Returns:
        Mean L1 loss over the batch before the update
    """
    config = config or model.config
    batch = [pairs] if isinstance(pairs, DatasetPair) else list(pairs)
    parameters = model.parameters()
    for parameter in parameters:
        parameter.zero_grad()
    total = 0.0
    for pair in batch:
        inputs, target = random_crop(pair, config.crop, rng)
        grid = model.decoder_grid(inputs)
        coords, values = sample_targets(target, (config.crop, config.crop), config.coords_per_step, rng)
        prediction = model.query(grid, coords, query_cell(target.shape, (config.crop, config.crop)))
        loss = F.l1_loss(prediction, values)
        backward(F.scale(loss, 1.0 / len(batch)))
        total += loss.item()
    adam_step(optimizer, parameters)
    return total / len(batch)


class Trainer:
    """
    Epoch loop around train_step with validation, plateau learning-rate decay and best-model tracking.
    """

    def __init__(
        self,
        model: LcnfModel,
        config: Optional[LcnfConfig] = None,
        rng: Optional[np.random.Generator] = None,
        optimizer: Optional[AdamState] = None,
    ):
        self.model = model
        self.config = config or model.config
        self.rng = rng if rng is not None else np.random.default_rng(self.config.seed)
        self.optimizer = optimizer or AdamState.for_parameters(model.parameters(), self.config.adam)
        self.schedule = PlateauSchedule.from_config(self.config.plateau)
        self.history = TrainingHistory()
        self.best_state: Optional[dict[str, np.ndarray]] = None

    @property
    def steps(self) -> int:
        return self.optimizer.step

    def _budget_left(self) -> bool:
        return self.config.max_steps is None or self.steps < self.config.max_steps

    def step(self, pairs: Sequence[DatasetPair]) -> float:
        loss = train_step(self.model, pairs, self.optimizer, self.rng, self.config)
        self.history.step_losses.append(loss)
        logger.debug(f"step {self.steps}: loss {loss:.6f}")
        return loss

    def run_epoch(self, train_pairs: Sequence[DatasetPair]) -> float:
        order = self.rng.permutation(len(train_pairs))
        losses = []
        for start in range(0, len(order), self.config.batch):
            if not self._budget_left():
                break
            losses.append(self.step([train_pairs[i] for i in order[start : start + self.config.batch]]))
        return float(np.mean(losses)) if losses else math.nan

    def validate(self, pairs: Sequence[DatasetPair]) -> float:
        """
        Mean L1 error of full-grid inference against each target, in normalised units.
        """
        errors = [
            float(np.abs(infer_normalized(self.model, pair.inputs, pair.target.shape) - pair.target).mean())  # type: ignore[arg-type]
            for pair in pairs
        ]
        return float(np.mean(errors))

    def fit(
        self,
        train_pairs: Sequence[DatasetPair],
        val_pairs: Sequence[DatasetPair] = (),
        epochs: Optional[int] = None,
        restore_best: bool = True,
    ) -> TrainingHistory:
        """
        Train for `epochs` epochs or until max_steps optimizer steps.
        The validation loss (training loss without a validation split) drives the plateau
        schedule and the best snapshot.
        """
        if not train_pairs:
            raise ConfigurationError("training needs at least one pair")
        for epoch in range(epochs or self.config.epochs):
            if not self._budget_left():
                break
            epoch_loss = self.run_epoch(train_pairs)
            monitored = self.validate(val_pairs) if val_pairs else epoch_loss
            self.history.epoch_losses.append(epoch_loss)
            if val_pairs:
                self.history.val_losses.append(monitored)
            self.history.learning_rates.append(self.optimizer.lr)
            if monitored < self.history.best_loss:
                self.history.best_loss = monitored
                self.history.best_epoch = epoch
                self.best_state = self.model.state_dict()
            self.optimizer.lr = plateau_update(self.schedule, monitored, self.optimizer.lr)
            logger.info(
                f"Epoch {epoch}: train loss {epoch_loss:.6f}, monitored {monitored:.6f}, "
                f"lr {self.history.learning_rates[-1]:.3g}, steps {self.steps}"
            )
        if restore_best and self.best_state is not None:
            self.model.load_state_dict(self.best_state)
        return self.history

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            parameters=self.model.state_dict(),
            config=self.config.model_dump(mode="json"),
            config_hash=config_hash(self.config),
            optimizer=self.optimizer,
            metadata={
                "steps": self.steps,
                "best_epoch": self.history.best_epoch,
                "best_loss": self.history.best_loss if math.isfinite(self.history.best_loss) else None,
            },
        )

    def save(self, path: str | Path) -> Path:
        return write_checkpoint(path, self.checkpoint())


def load_model(path: str | Path) -> tuple[LcnfModel, Checkpoint]:
    """
    Rebuild a model from a checkpoint; the stored config fixes the architecture.
    """
    checkpoint = read_checkpoint(path)
    config = LcnfConfig.model_validate(checkpoint.config)
    model = LcnfModel(config)
    model.load_state_dict(checkpoint.parameters)
    return model, checkpoint
