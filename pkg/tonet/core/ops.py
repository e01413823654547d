"""
Layer helpers over the tensor primitives.

Thin named wrappers so model code reads as layers rather than primitive ids.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from .tensor import Tensor, apply_primitive


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x (..., in) @ weight (in, out) + bias (out)."""
    out = apply_primitive("matmul", [x, weight])
    if bias is not None:
        out = apply_primitive("add", [out, bias])
    return out


def relu(x: Tensor) -> Tensor:
    return apply_primitive("relu", [x])


def sigmoid(x: Tensor) -> Tensor:
    return apply_primitive("sigmoid", [x])


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    return apply_primitive("softmax", [x], {"axis": axis})


def scale(x: Tensor, factor: float) -> Tensor:
    return apply_primitive("scale", [x], {"factor": factor})


def add(a: Tensor, b: Tensor) -> Tensor:
    return apply_primitive("add", [a, b])


def mul(a: Tensor, b: Tensor) -> Tensor:
    return apply_primitive("mul", [a, b])


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return apply_primitive("matmul", [a, b])


def concat(xs: Sequence[Tensor], axis: int) -> Tensor:
    return apply_primitive("concat", list(xs), {"axis": axis})


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    return apply_primitive("transpose", [x], {"axes": tuple(axes)})


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    return apply_primitive("reshape", [x], {"shape": tuple(shape)})


def mean(x: Tensor, axis=None) -> Tensor:
    return apply_primitive("mean", [x], {"axis": axis})


def total(x: Tensor, axis=None) -> Tensor:
    return apply_primitive("sum", [x], {"axis": axis})


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    return apply_primitive("layer_norm", [x, gamma, beta], {"eps": eps})


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.9,
) -> Tensor:
    return apply_primitive(
        "batch_norm",
        [x, gamma, beta],
        {
            "running_mean": running_mean,
            "running_var": running_var,
            "training": training,
            "momentum": momentum,
        },
    )


def conv2d(
    x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, padding: Tuple[int, int] = (0, 0)
) -> Tensor:
    inputs = [x, weight] + ([bias] if bias is not None else [])
    return apply_primitive("conv2d", inputs, {"padding": padding})


def conv1d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, padding: int = 0) -> Tensor:
    inputs = [x, weight] + ([bias] if bias is not None else [])
    return apply_primitive("conv1d", inputs, {"padding": padding})


def max_pool2d(x: Tensor, kernel: Tuple[int, int]) -> Tensor:
    """Pooled tensor; argmax indices live in the result's aux["indices"]."""
    return apply_primitive("max_pool2d", [x], {"kernel": tuple(kernel)})


def max_unpool2d(x: Tensor, pooled_from: Tensor) -> Tensor:
    """Invert a max_pool2d using the indices stored on its output `pooled_from`."""
    _, _, h, w = pooled_from.aux["input_shape"]
    return apply_primitive(
        "max_unpool2d", [x], {"indices": pooled_from.aux["indices"], "output_size": (h, w)}
    )


def bce(prediction: Tensor, target: Tensor, eps: float = 1e-7) -> Tensor:
    return apply_primitive("bce", [prediction, target], {"eps": eps})


def kaiming_uniform(rng: np.random.Generator, shape: Sequence[int], fan_in: int) -> np.ndarray:
    """Kaiming-uniform init for ReLU stacks: U(-sqrt(6 / fan_in), sqrt(6 / fan_in))."""
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=tuple(shape))
