"""
Encoder Backbones

Both kinds map a (B, 3, F, T) feature block to a (B, F+1, T) salience map
whose row 0 is the non-melody row.

- mlp: per-frame fully-connected stack over the 3F input features
- conv-encdec: 2D conv blocks with (k x 1) frequency pools, symmetric
  unpools, and a non-melody row read off the bottleneck
"""

from typing import List

import numpy as np

from ..core import ops
from ..core.tensor import ShapeError, Tensor
from .config import BackboneSpec
from .params import BoundGroup, ParamGroup


def _conv_init(rng: np.random.Generator, out_ch: int, in_ch: int, kh: int, kw: int) -> np.ndarray:
    return ops.kaiming_uniform(rng, (out_ch, in_ch, kh, kw), fan_in=in_ch * kh * kw)


def _bn(group: ParamGroup, prefix: str, channels: int):
    group.params[f"{prefix}.gamma"] = np.ones(channels)
    group.params[f"{prefix}.beta"] = np.zeros(channels)
    group.buffers[f"{prefix}.mean"] = np.zeros(channels)
    group.buffers[f"{prefix}.var"] = np.ones(channels)


def init_backbone(spec: BackboneSpec, num_bins: int, rng: np.random.Generator) -> ParamGroup:
    group = ParamGroup()
    if spec.kind == "mlp":
        sizes = [3 * num_bins, spec.mlp_hidden, spec.mlp_hidden, num_bins + 1]
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            group.params[f"fc{i}.w"] = ops.kaiming_uniform(rng, (fan_in, fan_out), fan_in)
            group.params[f"fc{i}.b"] = np.zeros(fan_out)
        return group

    k = spec.conv_kernel
    channels = spec.conv_channels
    in_ch = 3
    for i, out_ch in enumerate(channels):
        group.params[f"enc{i}.w"] = _conv_init(rng, out_ch, in_ch, k, k)
        group.params[f"enc{i}.b"] = np.zeros(out_ch)
        _bn(group, f"enc{i}.bn", out_ch)
        in_ch = out_ch

    group.params["voicing.w"] = _conv_init(rng, 1, channels[-1], bottleneck_size(spec, num_bins), 1)
    group.params["voicing.b"] = np.zeros(1)

    for i in reversed(range(len(channels))):
        out_ch = channels[i - 1] if i > 0 else channels[0]
        group.params[f"dec{i}.w"] = _conv_init(rng, out_ch, channels[i], k, k)
        group.params[f"dec{i}.b"] = np.zeros(out_ch)
        _bn(group, f"dec{i}.bn", out_ch)

    group.params["head.w"] = _conv_init(rng, 1, channels[0], k, k)
    group.params["head.b"] = np.zeros(1)
    return group


def _check_input(x: Tensor, num_bins: int):
    if len(x.shape) != 4 or x.shape[1] != 3 or x.shape[2] != num_bins:
        raise ShapeError(f"backbone: expected input (B, 3, {num_bins}, T), got {x.shape}")


def _mlp_forward(params: BoundGroup, x: Tensor) -> Tensor:
    b, c, f, t = x.shape
    h = ops.reshape(ops.transpose(x, (0, 3, 1, 2)), (b, t, c * f))
    h = ops.relu(ops.linear(h, params["fc0.w"], params["fc0.b"]))
    h = ops.relu(ops.linear(h, params["fc1.w"], params["fc1.b"]))
    h = ops.sigmoid(ops.linear(h, params["fc2.w"], params["fc2.b"]))
    return ops.transpose(h, (0, 2, 1))


def _conv_block(params: BoundGroup, prefix: str, x: Tensor, pad: int, training: bool) -> Tensor:
    h = ops.conv2d(x, params[f"{prefix}.w"], params[f"{prefix}.b"], padding=(pad, pad))
    h = ops.batch_norm(
        h,
        params[f"{prefix}.bn.gamma"],
        params[f"{prefix}.bn.beta"],
        params.buffers[f"{prefix}.bn.mean"],
        params.buffers[f"{prefix}.bn.var"],
        training=training,
    )
    return ops.relu(h)


def _conv_forward(spec: BackboneSpec, params: BoundGroup, x: Tensor, training: bool) -> Tensor:
    pad = spec.conv_kernel // 2
    pooled: List[Tensor] = []
    h = x
    for i, p in enumerate(spec.pool_kernels):
        h = _conv_block(params, f"enc{i}", h, pad, training)
        h = ops.max_pool2d(h, (p, 1))
        pooled.append(h)

    # (B, C, bottleneck, T) -> (B, 1, 1, T)
    voicing = ops.conv2d(h, params["voicing.w"], params["voicing.b"])

    for i in reversed(range(len(spec.pool_kernels))):
        h = ops.max_unpool2d(h, pooled[i])
        h = _conv_block(params, f"dec{i}", h, pad, training)
    pitch = ops.conv2d(h, params["head.w"], params["head.b"], padding=(pad, pad))

    salience = ops.concat([voicing, pitch], axis=2)
    b, _, rows, t = salience.shape
    return ops.sigmoid(ops.reshape(salience, (b, rows, t)))


def backbone_forward(
    spec: BackboneSpec, params: BoundGroup, x: Tensor, num_bins: int, training: bool = False
) -> Tensor:
    """
    Encoder forward pass.

    Args:
        spec: Backbone kind and widths
        params: Bound encoder group
        x: (B, 3, F, T) CFP or TCFP block
        num_bins: F
        training: Batch statistics in batch norm when True

    Returns:
        (B, F+1, T) salience in (0, 1), row 0 non-melody
    """
    _check_input(x, num_bins)
    if spec.kind == "mlp":
        return _mlp_forward(params, x)
    return _conv_forward(spec, params, x, training)


def bottleneck_size(spec: BackboneSpec, num_bins: int) -> int:
    size = num_bins
    for p in spec.pool_kernels:
        size //= p
    return size

