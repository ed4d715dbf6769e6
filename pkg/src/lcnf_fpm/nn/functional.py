from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from lcnf_fpm.core.exceptions import ShapeMismatchError
from lcnf_fpm.nn.tensor import Tensor, make_result


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    def backward(grad: np.ndarray) -> None:
        a.accumulate(_unbroadcast(grad, a.shape))
        b.accumulate(_unbroadcast(grad, b.shape))

    return make_result(a.data + b.data, (a, b), "add", backward)


def scale(a: Tensor, factor: float) -> Tensor:
    def backward(grad: np.ndarray) -> None:
        a.accumulate(grad * factor)

    return make_result(a.data * factor, (a,), "scale", backward)


def mul_const(a: Tensor, constant: np.ndarray) -> Tensor:
    """
    Elementwise product with a constant array that receives no gradient.
    """
    constant = np.asarray(constant, dtype=np.float64)

    def backward(grad: np.ndarray) -> None:
        a.accumulate(_unbroadcast(grad * constant, a.shape))

    return make_result(a.data * constant, (a,), "mul_const", backward)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def backward(grad: np.ndarray) -> None:
        a.accumulate(grad * mask)

    return make_result(a.data * mask, (a,), "relu", backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    sizes = [tensor.shape[axis] for tensor in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(grad: np.ndarray) -> None:
        for tensor, piece in zip(tensors, np.split(grad, bounds, axis=axis)):
            tensor.accumulate(np.ascontiguousarray(piece))

    return make_result(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), "concat", backward)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    def backward(grad: np.ndarray) -> None:
        a.accumulate(grad.reshape(a.shape))

    return make_result(a.data.reshape(shape), (a,), "reshape", backward)


def transpose(a: Tensor, axes: tuple[int, ...]) -> Tensor:
    inverse = tuple(np.argsort(axes))

    def backward(grad: np.ndarray) -> None:
        a.accumulate(np.ascontiguousarray(grad.transpose(inverse)))

    return make_result(np.ascontiguousarray(a.data.transpose(axes)), (a,), "transpose", backward)


def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    def backward(grad: np.ndarray) -> None:
        expanded = grad if axis is None else np.expand_dims(grad, axis)
        a.accumulate(np.broadcast_to(expanded, a.shape).copy())

    return make_result(np.asarray(a.data.sum(axis=axis)), (a,), "sum", backward)


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """
    Fully connected layer x @ W^T + b for x of shape (n, in) and W of shape (out, in).
    """
    if x.shape[-1] != weight.shape[1]:
        raise ShapeMismatchError(f"linear expects {weight.shape[1]} input features, got {x.shape[-1]}")

    def backward(grad: np.ndarray) -> None:
        x.accumulate(grad @ weight.data)
        weight.accumulate(grad.T @ x.data)
        bias.accumulate(grad.sum(axis=0))

    return make_result(x.data @ weight.data.T + bias.data, (x, weight, bias), "linear", backward)


def _im2col(padded: np.ndarray, rows: int, cols: int) -> np.ndarray:
    # [c, i, j, di, dj] = padded[c, i + di, j + dj]
    windows = sliding_window_view(padded, (3, 3), axis=(1, 2))
    return windows.transpose(1, 2, 0, 3, 4).reshape(rows * cols, -1)


def conv2d_3x3(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """
    Shape-preserving 3x3 cross-correlation with zero padding 1.
    Args:
        x: Input of shape (C_in, H, W)
        weight: Kernels of shape (C_out, C_in, 3, 3)
        bias: Bias of shape (C_out,)
    Returns:
        Output of shape (C_out, H, W)
    """
    if x.data.ndim != 3 or weight.shape[1:] != (x.shape[0], 3, 3):
        raise ShapeMismatchError(
            f"conv2d_3x3 weight {weight.shape} does not fit input {x.shape}"
        )
    channels, rows, cols = x.shape
    out_channels = weight.shape[0]
    columns = _im2col(np.pad(x.data, ((0, 0), (1, 1), (1, 1))), rows, cols)
    matrix = weight.data.reshape(out_channels, -1)
    out = (columns @ matrix.T + bias.data).T.reshape(out_channels, rows, cols)

    def backward(grad: np.ndarray) -> None:
        flat = grad.reshape(out_channels, rows * cols).T
        weight.accumulate((flat.T @ columns).reshape(weight.shape))
        bias.accumulate(flat.sum(axis=0))
        if not x.requires_grad:
            return
        patches = (flat @ matrix).reshape(rows, cols, channels, 3, 3)
        padded = np.zeros((channels, rows + 2, cols + 2))
        for di in range(3):
            for dj in range(3):
                padded[:, di : di + rows, dj : dj + cols] += patches[:, :, :, di, dj].transpose(2, 0, 1)
        x.accumulate(padded[:, 1:-1, 1:-1].copy())

    return make_result(np.ascontiguousarray(out), (x, weight, bias), "conv2d_3x3", backward)


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    index = np.asarray(index, dtype=np.int64)

    def backward(grad: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        np.add.at(full, index, grad)
        a.accumulate(full)

    return make_result(a.data[index], (a,), "gather_rows", backward)


def unfold3x3(a: Tensor) -> Tensor:
    """
    Replace each cell of a (D, H, W) grid by its zero-padded 3x3 neighbourhood.
    Output channel block t = (l + 1) * 3 + (n + 1) holds the neighbour at offset (l, n).
    """
    depth, rows, cols = a.shape
    padded = np.pad(a.data, ((0, 0), (1, 1), (1, 1)))
    blocks = [
        padded[:, 1 + l : 1 + l + rows, 1 + n : 1 + n + cols]
        for l in (-1, 0, 1)
        for n in (-1, 0, 1)
    ]

    def backward(grad: np.ndarray) -> None:
        full = np.zeros((depth, rows + 2, cols + 2))
        for t, (l, n) in enumerate((l, n) for l in (-1, 0, 1) for n in (-1, 0, 1)):
            full[:, 1 + l : 1 + l + rows, 1 + n : 1 + n + cols] += grad[t * depth : (t + 1) * depth]
        a.accumulate(full[:, 1:-1, 1:-1].copy())

    return make_result(np.concatenate(blocks, axis=0), (a,), "unfold3x3", backward)


def l1_loss(prediction: Tensor, target: np.ndarray) -> Tensor:
    target = np.asarray(target, dtype=np.float64)
    if prediction.shape != target.shape:
        raise ShapeMismatchError(f"prediction {prediction.shape} and target {target.shape} differ")
    difference = prediction.data - target

    def backward(grad: np.ndarray) -> None:
        prediction.accumulate(grad * np.sign(difference) / difference.size)

    return make_result(np.asarray(np.abs(difference).mean()), (prediction,), "l1_loss", backward)
