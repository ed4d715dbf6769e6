from typing import Iterator

import numpy as np

from lcnf_fpm.core.enums import TensorRole
from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.nn import functional as F
from lcnf_fpm.nn.init import kaiming_uniform
from lcnf_fpm.nn.tensor import Tensor


class Module:
    """
    Parameter container. Attributes that are parameter tensors, modules or lists of modules
    are discovered in assignment order.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            path = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.role == TensorRole.PARAMETER:
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{path}.")
            elif isinstance(value, list):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{index}.")

    def parameters(self) -> list[Tensor]:
        return [parameter for _, parameter in self.named_parameters()]

    def zero_grad(self) -> None:
        for parameter in self.parameters():
            parameter.zero_grad()

    def parameter_count(self) -> int:
        return sum(parameter.data.size for parameter in self.parameters())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: parameter.data.copy() for name, parameter in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise ShapeMismatchError(
                "state does not match the model", {"missing": missing, "unexpected": unexpected}
            )
        for name, parameter in own.items():
            values = np.asarray(state[name], dtype=np.float64)
            if values.shape != parameter.shape:
                raise ShapeMismatchError(f"parameter {name} expects {parameter.shape}, got {values.shape}")
            parameter.data = values.copy()
            parameter.zero_grad()


class Conv2d3x3(Module):
    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator):
        fan_in = in_channels * 9
        self.weight = Tensor.parameter(kaiming_uniform(rng, (out_channels, in_channels, 3, 3), fan_in))
        self.bias = Tensor.parameter(np.zeros(out_channels))

    def __call__(self, x: Tensor) -> Tensor:
        return F.conv2d_3x3(x, self.weight, self.bias)


class Linear(Module):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.weight = Tensor.parameter(kaiming_uniform(rng, (out_features, in_features), in_features))
        self.bias = Tensor.parameter(np.zeros(out_features))

    def __call__(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)


class ResidualBlock(Module):
    """
    conv -> ReLU -> conv, scaled by res_scale and added back onto the input.
    """

    def __init__(self, channels: int, rng: np.random.Generator, res_scale: float = 1.0):
        self.conv1 = Conv2d3x3(channels, channels, rng)
        self.conv2 = Conv2d3x3(channels, channels, rng)
        self.res_scale = res_scale

    def __call__(self, x: Tensor) -> Tensor:
        body = self.conv2(F.relu(self.conv1(x)))
        if self.res_scale != 1.0:
            body = F.scale(body, self.res_scale)
        return F.add(x, body)


class Mlp(Module):
    """
    Stack of linear layers with ReLU between them and a linear output layer.
    """

    def __init__(self, sizes: list[int], rng: np.random.Generator):
        if len(sizes) < 2:
            raise ShapeMismatchError(f"an MLP needs at least input and output sizes, got {sizes}")
        self.layers = [Linear(fan_in, fan_out, rng) for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]

    def __call__(self, x: Tensor) -> Tensor:
        for index, layer in enumerate(self.layers):
            x = layer(x)
            if index < len(self.layers) - 1:
                x = F.relu(x)
        return x
