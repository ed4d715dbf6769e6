from dataclasses import dataclass
from typing import Callable

import numpy as np

from lcnf_fpm.config import logger
from lcnf_fpm.nn import functional as F
from lcnf_fpm.nn.modules import Mlp, ResidualBlock
from lcnf_fpm.nn.tensor import Tensor, backward, no_grad

FD_STEP = 1e-5
TOLERANCE = 1e-5
# Inputs feeding a ReLU are redrawn until no pre-activation sits closer than this to the kink.
KINK_MARGIN = 1e-3

LossBuilder = Callable[[], Tensor]


@dataclass
class GradcheckResult:
    layer: str
    config_index: int
    max_relative_error: float
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_relative_error < self.tolerance


def numerical_gradient(build: LossBuilder, tensor: Tensor, step: float = FD_STEP) -> np.ndarray:
    """
    Central-difference gradient of a scalar loss with respect to one tensor.
    """
    gradient = np.zeros_like(tensor.data)
    flat_data = tensor.data.reshape(-1)
    flat_grad = gradient.reshape(-1)
    with no_grad():
        for index in range(flat_data.size):
            saved = flat_data[index]
            flat_data[index] = saved + step
            plus = build().item()
            flat_data[index] = saved - step
            minus = build().item()
            flat_data[index] = saved
            flat_grad[index] = (plus - minus) / (2.0 * step)
    return gradient


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def check_gradients(build: LossBuilder, inputs: list[Tensor], step: float = FD_STEP) -> float:
    """
    Compare tape gradients against central differences for every input tensor.
    Args:
        build: Rebuilds the scalar loss from the current input values
        inputs: Leaf tensors with requires_grad set
        step: Finite-difference step
    Returns:
        The largest normwise relative error over all inputs
    """
    for tensor in inputs:
        tensor.zero_grad()
    backward(build())
    analytic = [tensor.grad.copy() for tensor in inputs]
    return max(
        relative_error(grad, numerical_gradient(build, tensor, step))
        for grad, tensor in zip(analytic, inputs)
    )


def _leaf(rng: np.random.Generator, shape: tuple[int, ...]) -> Tensor:
    return Tensor(rng.standard_normal(shape), requires_grad=True)


def _projected(forward: Callable[[], Tensor], rng: np.random.Generator) -> LossBuilder:
    with no_grad():
        weights = rng.standard_normal(forward().shape)
    return lambda: F.sum(F.mul_const(forward(), weights))


def _conv_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    c_in, c_out = rng.integers(1, 4, size=2)
    rows, cols = rng.integers(3, 7, size=2)
    x = _leaf(rng, (c_in, rows, cols))
    weight = _leaf(rng, (c_out, c_in, 3, 3))
    bias = _leaf(rng, (c_out,))
    return _projected(lambda: F.conv2d_3x3(x, weight, bias), rng), [x, weight, bias]


def _linear_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    count, fan_in, fan_out = rng.integers(1, 6, size=3)
    x = _leaf(rng, (count, fan_in))
    weight = _leaf(rng, (fan_out, fan_in))
    bias = _leaf(rng, (fan_out,))
    return _projected(lambda: F.linear(x, weight, bias), rng), [x, weight, bias]


def _relu_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    raw = rng.standard_normal((4, 5))
    x = Tensor(np.sign(raw) * (0.1 + np.abs(raw)), requires_grad=True)
    return _projected(lambda: F.relu(x), rng), [x]


def _concat_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    axis = int(rng.integers(0, 2))
    a = _leaf(rng, (3, 4))
    b = _leaf(rng, (2, 4) if axis == 0 else (3, 2))
    return _projected(lambda: F.concat([a, b], axis=axis), rng), [a, b]


def _add_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    a = _leaf(rng, (3, 4))
    b = _leaf(rng, (4,))
    return _projected(lambda: F.scale(F.add(a, b), 0.5), rng), [a, b]


def _gather_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    a = _leaf(rng, (5, 3))
    index = rng.integers(0, 5, size=7)
    return _projected(lambda: F.gather_rows(a, index), rng), [a]


def _unfold_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    depth = int(rng.integers(1, 3))
    rows, cols = rng.integers(1, 5, size=2)
    a = _leaf(rng, (depth, rows, cols))
    return _projected(lambda: F.unfold3x3(a), rng), [a]


def _reshape_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    a = _leaf(rng, (2, 3, 4))
    return (
        _projected(lambda: F.sum(F.transpose(F.reshape(a, (6, 4)), (1, 0)), axis=1), rng),
        [a],
    )


def _l1_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    prediction = _leaf(rng, (4, 3))
    target = prediction.data + np.sign(rng.standard_normal((4, 3))) * (0.1 + rng.random((4, 3)))
    return (lambda: F.l1_loss(prediction, target)), [prediction]


def _residual_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    channels = int(rng.integers(1, 3))
    block = ResidualBlock(channels, rng, res_scale=0.5)
    while True:
        x = _leaf(rng, (channels, 4, 4))
        with no_grad():
            hidden = block.conv1(x).data
        if np.abs(hidden).min() > KINK_MARGIN:
            break
    return _projected(lambda: block(x), rng), [x] + block.parameters()


def _mlp_case(rng: np.random.Generator) -> tuple[LossBuilder, list[Tensor]]:
    mlp = Mlp([3, 5, 4, 2], rng)
    while True:
        x = _leaf(rng, (3, 3))
        margin = np.inf
        with no_grad():
            hidden = x
            for layer in mlp.layers[:-1]:
                hidden = layer(hidden)
                margin = min(margin, float(np.abs(hidden.data).min()))
                hidden = F.relu(hidden)
        if margin > KINK_MARGIN:
            break
    return _projected(lambda: mlp(x), rng), [x] + mlp.parameters()


CASES: dict[str, Callable[[np.random.Generator], tuple[LossBuilder, list[Tensor]]]] = {
    "conv2d_3x3": _conv_case,
    "linear": _linear_case,
    "relu": _relu_case,
    "concat": _concat_case,
    "add": _add_case,
    "gather_rows": _gather_case,
    "unfold3x3": _unfold_case,
    "reshape_transpose_sum": _reshape_case,
    "l1_loss": _l1_case,
    "residual_block": _residual_case,
    "mlp": _mlp_case,
}


def run_gradchecks(
    seed: int = 0, configs: int = 10, layers: list[str] | None = None
) -> list[GradcheckResult]:
    """
    Check every differentiable layer on `configs` random configurations.
    Args:
        seed: Seed of the configuration generator
        configs: Number of random configurations per layer
        layers: Optional subset of layer names
    Returns:
        One result per (layer, configuration)
    """
    rng = np.random.default_rng(seed)
    results = []
    for name in layers or list(CASES):
        for index in range(configs):
            build, inputs = CASES[name](rng)
            error = check_gradients(build, inputs)
            results.append(GradcheckResult(layer=name, config_index=index, max_relative_error=error))
        worst = max(r.max_relative_error for r in results if r.layer == name)
        logger.info(f"gradcheck {name}: worst relative error {worst:.2e}")
    return results
