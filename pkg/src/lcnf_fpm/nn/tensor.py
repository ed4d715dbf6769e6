from contextlib import contextmanager
from contextvars import ContextVar
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from lcnf_fpm.core.enums import TensorRole
from lcnf_fpm.core.exceptions import NumericalError, ShapeMismatchError

_grad_enabled: ContextVar[bool] = ContextVar("lcnf_fpm_grad_enabled", default=True)


def is_grad_enabled() -> bool:
    return _grad_enabled.get()


@contextmanager
def no_grad() -> Iterator[None]:
    """
    Stop recording the tape inside the block (per thread and per task).
    """
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def check_finite(values: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"non-finite values produced by {op}", {"op": op})


class Tensor:
    """
    Dense float64 value node of the reverse-mode tape.
    Parameters own their gradient buffers; activations only record parents and a backward rule.
    """

    def __init__(
        self,
        data: np.ndarray | float,
        requires_grad: bool = False,
        role: TensorRole = TensorRole.ACTIVATION,
        name: str = "",
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.role = role
        self.name = name
        self._grad: Optional[np.ndarray] = np.zeros_like(self.data) if requires_grad else None
        self._parents: tuple["Tensor", ...] = ()
        self._backward: Optional[Callable[[np.ndarray], None]] = None
        self.op = "leaf"

    @classmethod
    def parameter(cls, data: np.ndarray, name: str = "") -> "Tensor":
        return cls(data, requires_grad=True, role=TensorRole.PARAMETER, name=name)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            return np.zeros_like(self.data)
        return self._grad

    def zero_grad(self) -> None:
        self._grad = np.zeros_like(self.data) if self.requires_grad else None

    def accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if grad.shape != self.data.shape:
            raise ShapeMismatchError(f"gradient {grad.shape} does not match {self.op} output {self.data.shape}")
        check_finite(grad, f"backward of {self.op}")
        if self._grad is None:
            self._grad = grad.copy()
        else:
            self._grad += grad

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"


def make_result(
    data: np.ndarray,
    parents: Sequence[Tensor],
    op: str,
    backward: Callable[[np.ndarray], None],
) -> Tensor:
    check_finite(data, op)
    requires = is_grad_enabled() and any(parent.requires_grad for parent in parents)
    out = Tensor(data)
    out.op = op
    if requires:
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Populate .grad of every tensor reachable from a scalar loss.
    Args:
        loss: Single-element tensor
    Raises:
        ShapeMismatchError: If the loss is not a scalar
    """
    if loss.data.size != 1:
        raise ShapeMismatchError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    loss.accumulate(np.ones_like(loss.data))
    for node in reversed(_topological_order(loss)):
        if node._backward is not None and node._grad is not None:
            node._backward(node._grad)
