import math
from dataclasses import dataclass, field

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.core.schemas import AdamConfig, PlateauConfig
from lcnf_fpm.nn.tensor import Tensor


@dataclass
class AdamState:
    """
    First and second moment estimates, one pair per parameter in parameter order.
    """

    lr: float
    beta1: float
    beta2: float
    eps: float
    first: list[np.ndarray] = field(default_factory=list)
    second: list[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_parameters(cls, parameters: list[Tensor], config: AdamConfig) -> "AdamState":
        return cls(
            lr=config.lr,
            beta1=config.beta1,
            beta2=config.beta2,
            eps=config.eps,
            first=[np.zeros_like(p.data) for p in parameters],
            second=[np.zeros_like(p.data) for p in parameters],
        )


def adam_step(state: AdamState, parameters: list[Tensor]) -> None:
    """
    Apply one bias-corrected Adam update in place using the current parameter gradients.
    Raises:
        ShapeMismatchError: If the moments were built for different parameters
    """
    if len(parameters) != len(state.first):
        raise ShapeMismatchError(
            f"optimizer tracks {len(state.first)} parameters, got {len(parameters)}"
        )
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for parameter, first, second in zip(parameters, state.first, state.second):
        grad = parameter.grad
        first *= state.beta1
        first += (1.0 - state.beta1) * grad
        second *= state.beta2
        second += (1.0 - state.beta2) * grad * grad
        parameter.data -= state.lr * (first / correction1) / (np.sqrt(second / correction2) + state.eps)


@dataclass
class PlateauSchedule:
    factor: float
    patience: int
    best_loss: float = math.inf
    epochs_since_improve: int = 0
    reductions: int = 0

    @classmethod
    def from_config(cls, config: PlateauConfig) -> "PlateauSchedule":
        return cls(factor=config.factor, patience=config.patience)


def plateau_update(schedule: PlateauSchedule, epoch_loss: float, lr: float) -> float:
    """
    Track the epoch loss and return the learning rate for the next epoch.
    Args:
        schedule: Mutable plateau state
        epoch_loss: Validation (or training) loss of the finished epoch
        lr: Current learning rate
    Returns:
        lr multiplied by the factor once the loss has not improved for `patience` epochs, else lr
    """
    if epoch_loss < schedule.best_loss:
        schedule.best_loss = epoch_loss
        schedule.epochs_since_improve = 0
        return lr
    schedule.epochs_since_improve += 1
    if schedule.epochs_since_improve >= schedule.patience:
        schedule.epochs_since_improve = 0
        schedule.reductions += 1
        new_lr = lr * schedule.factor
        logger.info(f"Loss plateaued at {schedule.best_loss:.6g}; learning rate {lr:.3g} -> {new_lr:.3g}")
        return new_lr
    return lr
