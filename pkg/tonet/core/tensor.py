"""
Tensor Engine

Dense float64 tensors with reverse-mode differentiation.

The engine only knows the primitives the TONet graph is built from:
- Convolutions (2D, and 1D along time)
- Max-pool / max-unpool with stored argmax indices
- Matrix multiply, elementwise add/mul, scale, mean, sum
- ReLU, sigmoid, softmax
- Layer and batch normalization
- Concatenate, transpose, reshape
- Fused binary cross entropy

Primitives applied while a Graph is active on the current thread are
recorded; `backward` then walks the record in reverse.
"""

import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit


class ShapeError(ValueError):
    """Raised when a primitive receives incompatible shapes."""


class UnknownPrimitiveError(ValueError):
    """Raised when a primitive id is not registered."""


class Tensor:
    """A float64 array plus the bookkeeping needed for differentiation."""

    __slots__ = ("values", "aux", "__weakref__")

    def __init__(self, values: Any):
        self.values = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
        # Side outputs of a primitive (e.g. pool argmax indices)
        self.aux: Dict[str, Any] = {}

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        if self.values.size != 1:
            raise ShapeError(f"item: expected a single element, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values

    def __repr__(self):
        return f"Tensor(shape={self.shape})"

    # Operator sugar; every operator goes through apply_primitive
    def __add__(self, other: "Tensor") -> "Tensor":
        return apply_primitive("add", [self, other])

    def __mul__(self, other: "Tensor") -> "Tensor":
        return apply_primitive("mul", [self, other])

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return apply_primitive("matmul", [self, other])


@dataclass
class Node:
    """One applied primitive in a recorded graph."""

    primitive: "Primitive"
    inputs: List[Tensor]
    output: Tensor
    ctx: Any = None


class Graph:
    """
    Record of applied primitives.

    Usage:
        with Graph() as graph:
            w = graph.watch("w", Tensor(np.zeros(3)))
            loss = apply_primitive("sum", [w])
        grads = backward(graph, loss)
    """

    def __init__(self):
        self.nodes: List[Node] = []
        self.leaves: Dict[str, Tensor] = {}

    def watch(self, name: str, tensor: Tensor) -> Tensor:
        """Register a parameter tensor as a named leaf."""
        if name in self.leaves and self.leaves[name] is not tensor:
            raise ValueError(f"Leaf name '{name}' already registered")
        self.leaves[name] = tensor
        return tensor

    def record(self, node: Node):
        self.nodes.append(node)

    def __enter__(self) -> "Graph":
        _graph_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _graph_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False


_local = threading.local()


def _graph_stack() -> List[Graph]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_graph() -> Optional[Graph]:
    stack = _graph_stack()
    return stack[-1] if stack else None


# ===== Primitive registry =====


class Primitive:
    """Base primitive: forward returns (output, ctx); backward returns input grads."""

    kind: str = ""

    def forward(self, xs: List[np.ndarray], attrs: Dict[str, Any]) -> Tuple[np.ndarray, Any]:
        raise NotImplementedError

    def backward(
        self, ctx: Any, grad: np.ndarray, xs: List[np.ndarray], attrs: Dict[str, Any]
    ) -> List[Optional[np.ndarray]]:
        raise NotImplementedError

    def aux(self, ctx: Any) -> Dict[str, Any]:
        return {}


PRIMITIVES: Dict[str, Primitive] = {}


def register(kind: str) -> Callable[[type], type]:
    def decorator(cls):
        instance = cls()
        instance.kind = kind
        PRIMITIVES[kind] = instance
        return cls

    return decorator


def apply_primitive(
    kind: str, inputs: Sequence[Tensor], attrs: Optional[Dict[str, Any]] = None
) -> Tensor:
    """
    Apply a registered primitive.

    Args:
        kind: Primitive id (e.g. "conv2d", "relu")
        inputs: Input tensors
        attrs: Primitive attributes (kernel sizes, padding, axes, ...)

    Returns:
        Output tensor; recorded on the active graph if there is one
    """
    primitive = PRIMITIVES.get(kind)
    if primitive is None:
        raise UnknownPrimitiveError(f"Unknown primitive '{kind}'")
    attrs = attrs or {}
    inputs = list(inputs)
    out_values, ctx = primitive.forward([t.values for t in inputs], attrs)
    out = Tensor(out_values)
    out.aux.update(primitive.aux(ctx))

    graph = active_graph()
    if graph is not None:
        graph.record(Node(primitive=primitive, inputs=inputs, output=out, ctx=(ctx, attrs)))
    return out


def backward(graph: Graph, loss: Tensor) -> Dict[str, np.ndarray]:
    """
    Reverse-mode sweep over a recorded graph.

    Returns:
        Gradient table keyed by leaf name; leaves that did not take part in
        the loss receive zero gradients
    """
    if loss.size != 1:
        raise ShapeError(f"backward: loss must be a scalar, got shape {loss.shape}")

    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    for node in reversed(graph.nodes):
        upstream = grads.pop(id(node.output), None)
        if upstream is None:
            continue
        ctx, attrs = node.ctx
        xs = [t.values for t in node.inputs]
        input_grads = node.primitive.backward(ctx, upstream, xs, attrs)
        for tensor, g in zip(node.inputs, input_grads):
            if g is None:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g

    return {
        name: grads.get(id(t), np.zeros_like(t.values)).reshape(t.shape)
        for name, t in graph.leaves.items()
    }


def finite_diff_check(
    f: Callable[[Tensor], Tensor],
    x: np.ndarray,
    eps: float = 1e-6,
    coords: Optional[Sequence[int]] = None,
) -> float:
    """
    Compare analytic gradients of f at x with central differences.

    Args:
        f: Deterministic map from a tensor to a scalar tensor
        x: Point of evaluation
        eps: Finite-difference step, in [1e-7, 1e-3]
        coords: Optional flat coordinates to check (default: all)

    Returns:
        max over checked elements of |analytic - numeric| / max(1, |analytic|)
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    x = np.asarray(x, dtype=np.float64)

    with Graph() as graph:
        leaf = graph.watch("x", Tensor(x.copy()))
        out = f(leaf)
    value = out.item()
    if not np.isfinite(value):
        raise ValueError(f"f(x) is not finite: {value}")
    analytic = backward(graph, out)["x"].reshape(-1)

    flat = x.reshape(-1)
    indices = range(flat.size) if coords is None else coords
    worst = 0.0
    for i in indices:
        plus = flat.copy()
        minus = flat.copy()
        plus[i] += eps
        minus[i] -= eps
        f_plus = f(Tensor(plus.reshape(x.shape))).item()
        f_minus = f(Tensor(minus.reshape(x.shape))).item()
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise ValueError(f"f is not finite around coordinate {i}")
        numeric = (f_plus - f_minus) / (2.0 * eps)
        err = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]))
        worst = max(worst, err)
    return worst


# ===== Helpers =====


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_suffix_broadcast(kind: str, a: np.ndarray, b: np.ndarray):
    """Allow equal shapes or a second operand that broadcasts as a trailing suffix."""
    if a.shape == b.shape:
        return
    if b.ndim <= a.ndim and all(
        bd in (1, ad) for ad, bd in zip(a.shape[a.ndim - b.ndim:], b.shape)
    ):
        return
    raise ShapeError(f"{kind}: cannot combine shapes {a.shape} and {b.shape}")


def _pair(value, name: str) -> Tuple[int, int]:
    if isinstance(value, int):
        return value, value
    if len(value) != 2:
        raise ValueError(f"{name} must be an int or a pair, got {value}")
    return int(value[0]), int(value[1])


# ===== Elementwise =====


@register("add")
class Add(Primitive):
    def forward(self, xs, attrs):
        a, b = xs
        _check_suffix_broadcast("add", a, b)
        return a + b, None

    def backward(self, ctx, grad, xs, attrs):
        a, b = xs
        return [grad, _unbroadcast(grad, b.shape)]


@register("mul")
class Mul(Primitive):
    def forward(self, xs, attrs):
        a, b = xs
        _check_suffix_broadcast("mul", a, b)
        return a * b, None

    def backward(self, ctx, grad, xs, attrs):
        a, b = xs
        return [grad * b, _unbroadcast(grad * a, b.shape)]


@register("scale")
class Scale(Primitive):
    def forward(self, xs, attrs):
        return xs[0] * float(attrs["factor"]), None

    def backward(self, ctx, grad, xs, attrs):
        return [grad * float(attrs["factor"])]


@register("relu")
class Relu(Primitive):
    def forward(self, xs, attrs):
        return np.maximum(xs[0], 0.0), None

    def backward(self, ctx, grad, xs, attrs):
        return [grad * (xs[0] > 0)]


@register("sigmoid")
class Sigmoid(Primitive):
    def forward(self, xs, attrs):
        out = expit(xs[0])
        return out, out

    def backward(self, ctx, grad, xs, attrs):
        return [grad * ctx * (1.0 - ctx)]


@register("softmax")
class Softmax(Primitive):
    def forward(self, xs, attrs):
        axis = attrs.get("axis", -1)
        shifted = xs[0] - xs[0].max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        out = e / e.sum(axis=axis, keepdims=True)
        return out, out

    def backward(self, ctx, grad, xs, attrs):
        axis = attrs.get("axis", -1)
        dot = (grad * ctx).sum(axis=axis, keepdims=True)
        return [ctx * (grad - dot)]


# ===== Reductions and shape ops =====


@register("sum")
class Sum(Primitive):
    def forward(self, xs, attrs):
        axis = attrs.get("axis")
        return np.asarray(xs[0].sum(axis=axis, keepdims=attrs.get("keepdims", False))), None

    def backward(self, ctx, grad, xs, attrs):
        axis = attrs.get("axis")
        if axis is not None and not attrs.get("keepdims", False):
            grad = np.expand_dims(grad, axis)
        return [np.broadcast_to(grad, xs[0].shape).copy()]


@register("mean")
class Mean(Primitive):
    def forward(self, xs, attrs):
        axis = attrs.get("axis")
        return np.asarray(xs[0].mean(axis=axis, keepdims=attrs.get("keepdims", False))), None

    def backward(self, ctx, grad, xs, attrs):
        axis = attrs.get("axis")
        x = xs[0]
        count = x.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
        if axis is not None and not attrs.get("keepdims", False):
            grad = np.expand_dims(grad, axis)
        return [np.broadcast_to(grad / count, x.shape).copy()]


@register("concat")
class Concat(Primitive):
    def forward(self, xs, attrs):
        axis = attrs.get("axis", 0)
        ref = xs[0]
        for other in xs[1:]:
            if other.ndim != ref.ndim or any(
                d1 != d2 for i, (d1, d2) in enumerate(zip(ref.shape, other.shape))
                if i != axis % ref.ndim
            ):
                raise ShapeError(f"concat: cannot combine shapes {ref.shape} and {other.shape}")
        sizes = [x.shape[axis] for x in xs]
        return np.concatenate(xs, axis=axis), np.cumsum(sizes)[:-1]

    def backward(self, ctx, grad, xs, attrs):
        return list(np.split(grad, ctx, axis=attrs.get("axis", 0)))


@register("transpose")
class Transpose(Primitive):
    def forward(self, xs, attrs):
        axes = tuple(attrs["axes"])
        if sorted(axes) != list(range(xs[0].ndim)):
            raise ShapeError(f"transpose: axes {axes} do not match shape {xs[0].shape}")
        return np.ascontiguousarray(np.transpose(xs[0], axes)), None

    def backward(self, ctx, grad, xs, attrs):
        return [np.transpose(grad, np.argsort(attrs["axes"]))]


@register("reshape")
class Reshape(Primitive):
    def forward(self, xs, attrs):
        shape = tuple(attrs["shape"])
        try:
            return xs[0].reshape(shape), None
        except ValueError:
            raise ShapeError(f"reshape: cannot reshape {xs[0].shape} into {shape}") from None

    def backward(self, ctx, grad, xs, attrs):
        return [grad.reshape(xs[0].shape)]


# ===== Linear algebra =====


@register("matmul")
class MatMul(Primitive):
    def forward(self, xs, attrs):
        a, b = xs
        if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
            raise ShapeError(f"matmul: cannot combine shapes {a.shape} and {b.shape}")
        if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
            raise ShapeError(f"matmul: cannot combine shapes {a.shape} and {b.shape}")
        return np.matmul(a, b), None

    def backward(self, ctx, grad, xs, attrs):
        a, b = xs
        grad_a = np.matmul(grad, np.swapaxes(b, -1, -2))
        grad_b = np.matmul(np.swapaxes(a, -1, -2), grad)
        return [grad_a, _unbroadcast(grad_b, b.shape)]


# ===== Normalization =====


@register("layer_norm")
class LayerNorm(Primitive):
    """Normalize over the last axis; inputs (x, gamma, beta)."""

    def forward(self, xs, attrs):
        x, gamma, beta = xs
        if gamma.shape != (x.shape[-1],) or beta.shape != gamma.shape:
            raise ShapeError(f"layer_norm: cannot combine shapes {x.shape} and {gamma.shape}")
        eps = attrs.get("eps", 1e-5)
        mu = x.mean(axis=-1, keepdims=True)
        inv_std = 1.0 / np.sqrt(x.var(axis=-1, keepdims=True) + eps)
        xhat = (x - mu) * inv_std
        return xhat * gamma + beta, (xhat, inv_std)

    def backward(self, ctx, grad, xs, attrs):
        x, gamma, _ = xs
        xhat, inv_std = ctx
        dxhat = grad * gamma
        dx = inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        lead = tuple(range(x.ndim - 1))
        return [dx, (grad * xhat).sum(axis=lead), grad.sum(axis=lead)]


@register("batch_norm")
class BatchNorm(Primitive):
    """
    Normalize over every axis except the channel axis 1; inputs (x, gamma, beta).

    attrs:
        running_mean, running_var: buffers updated in place in training mode
        training: batch statistics if True, running statistics otherwise
        momentum: weight of the previous running value (0.9)
    """

    def forward(self, xs, attrs):
        x, gamma, beta = xs
        channels = x.shape[1]
        if gamma.shape != (channels,) or beta.shape != (channels,):
            raise ShapeError(f"batch_norm: cannot combine shapes {x.shape} and {gamma.shape}")
        eps = attrs.get("eps", 1e-5)
        axes = tuple(i for i in range(x.ndim) if i != 1)
        bshape = [1] * x.ndim
        bshape[1] = channels
        running_mean = attrs["running_mean"]
        running_var = attrs["running_var"]

        if attrs.get("training", True):
            mu = x.mean(axis=axes)
            var = x.var(axis=axes)
            count = x.size // channels
            momentum = attrs.get("momentum", 0.9)
            unbiased = var * count / max(count - 1, 1)
            running_mean *= momentum
            running_mean += (1.0 - momentum) * mu
            running_var *= momentum
            running_var += (1.0 - momentum) * unbiased
        else:
            mu = running_mean
            var = running_var

        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (x - mu.reshape(bshape)) * inv_std.reshape(bshape)
        out = xhat * gamma.reshape(bshape) + beta.reshape(bshape)
        return out, (xhat, inv_std, axes, bshape)

    def backward(self, ctx, grad, xs, attrs):
        x, gamma, _ = xs
        xhat, inv_std, axes, bshape = ctx
        dgamma = (grad * xhat).sum(axis=axes)
        dbeta = grad.sum(axis=axes)
        dxhat = grad * gamma.reshape(bshape)
        if attrs.get("training", True):
            dx = inv_std.reshape(bshape) * (
                dxhat
                - dxhat.mean(axis=axes, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=axes, keepdims=True)
            )
        else:
            dx = dxhat * inv_std.reshape(bshape)
        return [dx, dgamma, dbeta]


# ===== Convolution and pooling =====


@register("conv2d")
class Conv2d(Primitive):
    """Stride-1 zero-padded 2D convolution; inputs (x, weight[, bias])."""

    def forward(self, xs, attrs):
        x, w = xs[0], xs[1]
        if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
            raise ShapeError(f"conv2d: cannot combine shapes {x.shape} and {w.shape}")
        ph, pw = _pair(attrs.get("padding", 0), "padding")
        _, _, kh, kw = w.shape
        xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
        ho = xp.shape[2] - kh + 1
        wo = xp.shape[3] - kw + 1
        if ho < 1 or wo < 1:
            raise ShapeError(f"conv2d: cannot combine shapes {x.shape} and {w.shape}")
        b, c = x.shape[:2]
        out = np.zeros((b, w.shape[0], ho * wo))
        for i in range(kh):
            for j in range(kw):
                out += w[:, :, i, j] @ xp[:, :, i:i + ho, j:j + wo].reshape(b, c, ho * wo)
        out = out.reshape(b, w.shape[0], ho, wo)
        if len(xs) > 2:
            out += xs[2].reshape(1, -1, 1, 1)
        return out, (xp, ho, wo, ph, pw)

    def backward(self, ctx, grad, xs, attrs):
        x, w = xs[0], xs[1]
        xp, ho, wo, ph, pw = ctx
        _, _, kh, kw = w.shape
        b, c = xp.shape[:2]
        grad_flat = grad.reshape(b, w.shape[0], ho * wo)
        dw = np.empty_like(w)
        dxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                window = xp[:, :, i:i + ho, j:j + wo]
                dw[:, :, i, j] = np.tensordot(grad, window, axes=([0, 2, 3], [0, 2, 3]))
                dxp[:, :, i:i + ho, j:j + wo] += (w[:, :, i, j].T @ grad_flat).reshape(b, c, ho, wo)
        dx = dxp[:, :, ph:ph + x.shape[2], pw:pw + x.shape[3]]
        grads = [dx, dw]
        if len(xs) > 2:
            grads.append(grad.sum(axis=(0, 2, 3)))
        return grads


@register("conv1d")
class Conv1d(Primitive):
    """Stride-1 zero-padded convolution along the last (time) axis; inputs (x, weight[, bias])."""

    def forward(self, xs, attrs):
        x, w = xs[0], xs[1]
        if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1]:
            raise ShapeError(f"conv1d: cannot combine shapes {x.shape} and {w.shape}")
        pad = int(attrs.get("padding", 0))
        k = w.shape[2]
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        to = xp.shape[2] - k + 1
        if to < 1:
            raise ShapeError(f"conv1d: cannot combine shapes {x.shape} and {w.shape}")
        out = np.zeros((x.shape[0], w.shape[0], to))
        for i in range(k):
            out += w[:, :, i] @ xp[:, :, i:i + to]
        if len(xs) > 2:
            out += xs[2].reshape(1, -1, 1)
        return out, (xp, to, pad)

    def backward(self, ctx, grad, xs, attrs):
        x, w = xs[0], xs[1]
        xp, to, pad = ctx
        dw = np.empty_like(w)
        dxp = np.zeros_like(xp)
        for i in range(w.shape[2]):
            dw[:, :, i] = np.tensordot(grad, xp[:, :, i:i + to], axes=([0, 2], [0, 2]))
            dxp[:, :, i:i + to] += w[:, :, i].T @ grad
        grads = [dxp[:, :, pad:pad + x.shape[2]], dw]
        if len(xs) > 2:
            grads.append(grad.sum(axis=(0, 2)))
        return grads


@register("max_pool2d")
class MaxPool2d(Primitive):
    """
    Non-overlapping max-pool with stride equal to the kernel.

    Argmax ties resolve to the lowest flat index of the input map; the
    indices are exposed on the output tensor as aux["indices"].
    """

    def forward(self, xs, attrs):
        x = xs[0]
        kh, kw = _pair(attrs["kernel"], "kernel")
        if x.ndim != 4 or x.shape[2] % kh or x.shape[3] % kw:
            raise ShapeError(f"max_pool2d: cannot combine shapes {x.shape} and {(kh, kw)}")
        b, c, h, w = x.shape
        ho, wo = h // kh, w // kw
        blocks = x.reshape(b, c, ho, kh, wo, kw).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, ho, wo, kh * kw)
        local = blocks.argmax(axis=-1)
        out = np.take_along_axis(blocks, local[..., None], axis=-1)[..., 0]
        rows = np.arange(ho)[:, None] * kh + local // kw
        cols = np.arange(wo)[None, :] * kw + local % kw
        indices = rows * w + cols
        return out, (indices, x.shape)

    def aux(self, ctx):
        indices, shape = ctx
        return {"indices": indices, "input_shape": shape}

    def backward(self, ctx, grad, xs, attrs):
        indices, shape = ctx
        b, c, h, w = shape
        dx = np.zeros((b, c, h * w))
        np.put_along_axis(dx, indices.reshape(b, c, -1), grad.reshape(b, c, -1), axis=-1)
        return [dx.reshape(shape)]


@register("max_unpool2d")
class MaxUnpool2d(Primitive):
    """Scatter pooled values back to the argmax positions recorded by max_pool2d."""

    def forward(self, xs, attrs):
        x = xs[0]
        indices = attrs["indices"]
        h, w = attrs["output_size"]
        if indices.shape != x.shape:
            raise ShapeError(f"max_unpool2d: cannot combine shapes {x.shape} and {indices.shape}")
        b, c = x.shape[:2]
        out = np.zeros((b, c, h * w))
        np.put_along_axis(out, indices.reshape(b, c, -1), x.reshape(b, c, -1), axis=-1)
        return out.reshape(b, c, h, w), None

    def backward(self, ctx, grad, xs, attrs):
        x = xs[0]
        b, c = x.shape[:2]
        flat = grad.reshape(b, c, -1)
        gathered = np.take_along_axis(flat, attrs["indices"].reshape(b, c, -1), axis=-1)
        return [gathered.reshape(x.shape)]


# ===== Loss =====


@register("bce")
class BinaryCrossEntropy(Primitive):
    """Mean-reduced BCE; inputs (prediction, target). Predictions are clamped to [eps, 1 - eps]."""

    def forward(self, xs, attrs):
        p, y = xs
        if p.shape != y.shape:
            raise ShapeError(f"bce: cannot combine shapes {p.shape} and {y.shape}")
        eps = attrs.get("eps", 1e-7)
        pc = np.clip(p, eps, 1.0 - eps)
        loss = -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)).mean()
        return np.asarray(loss), pc

    def backward(self, ctx, grad, xs, attrs):
        p, y = xs
        eps = attrs.get("eps", 1e-7)
        pc = ctx
        inside = (p >= eps) & (p <= 1.0 - eps)
        dp = grad * (pc - y) / (pc * (1.0 - pc)) / p.size * inside
        return [dp, None]
