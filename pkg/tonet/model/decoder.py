"""
Tone / Octave Decoder

Input projection to d_model, absolute sinusoidal positions, N transformer
blocks, then a per-frame classification head:

    x' = LayerNorm(x + MultiHeadSelfAttention(x))
    out = LayerNorm(x' + FeedForward(x'))
"""

from typing import Tuple

import numpy as np

from ..core import ops
from ..core.tensor import ShapeError, Tensor
from .config import DecoderConfig
from .params import BoundGroup, ParamGroup


def sinusoidal_positions(frames: int, d_model: int) -> np.ndarray:
    """(T, d) table: sin on even columns, cos on odd columns."""
    positions = np.arange(frames)[:, None]
    rates = 1.0 / 10000.0 ** (np.arange(0, d_model, 2) / d_model)
    table = np.zeros((frames, d_model))
    table[:, 0::2] = np.sin(positions * rates)
    table[:, 1::2] = np.cos(positions * rates[: d_model // 2])
    return table


def init_decoder(config: DecoderConfig, d_in: int, n_out: int, rng: np.random.Generator) -> ParamGroup:
    d, ff = config.d_model, config.ff_width
    group = ParamGroup()
    p = group.params
    p["proj.w"] = ops.kaiming_uniform(rng, (d_in, d), d_in)
    p["proj.b"] = np.zeros(d)
    for layer in range(config.layers):
        prefix = f"block{layer}"
        for name in ("wq", "wk", "wv", "wo"):
            p[f"{prefix}.attn.{name}"] = ops.kaiming_uniform(rng, (d, d), d)
        p[f"{prefix}.attn.bo"] = np.zeros(d)
        p[f"{prefix}.ln1.gamma"] = np.ones(d)
        p[f"{prefix}.ln1.beta"] = np.zeros(d)
        p[f"{prefix}.ff1.w"] = ops.kaiming_uniform(rng, (d, ff), d)
        p[f"{prefix}.ff1.b"] = np.zeros(ff)
        p[f"{prefix}.ff2.w"] = ops.kaiming_uniform(rng, (ff, d), ff)
        p[f"{prefix}.ff2.b"] = np.zeros(d)
        p[f"{prefix}.ln2.gamma"] = np.ones(d)
        p[f"{prefix}.ln2.beta"] = np.zeros(d)
    p["head.w"] = ops.kaiming_uniform(rng, (d, n_out), d)
    p["head.b"] = np.zeros(n_out)
    return group


def self_attention(config: DecoderConfig, params: BoundGroup, prefix: str, x: Tensor) -> Tuple[Tensor, Tensor]:
    """
    Multi-head self-attention over the frame axis.

    Returns:
        (output (B, T, d), attention weights (B, h, T, T) whose rows sum to 1)
    """
    b, t, d = x.shape
    h, width = config.heads, config.head_width

    def heads(name: str, axes) -> Tensor:
        projected = ops.matmul(x, params[f"{prefix}.attn.{name}"])
        return ops.transpose(ops.reshape(projected, (b, t, h, width)), axes)

    q = heads("wq", (0, 2, 1, 3))  # (B, h, T, w)
    k_t = heads("wk", (0, 2, 3, 1))  # (B, h, w, T)
    v = heads("wv", (0, 2, 1, 3))

    scores = ops.scale(ops.matmul(q, k_t), 1.0 / np.sqrt(width))
    weights = ops.softmax(scores, axis=-1)
    context = ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3))
    merged = ops.reshape(context, (b, t, d))
    return ops.linear(merged, params[f"{prefix}.attn.wo"], params[f"{prefix}.attn.bo"]), weights


def transformer_block(config: DecoderConfig, params: BoundGroup, layer: int, x: Tensor) -> Tensor:
    """(B, T, d_model) -> (B, T, d_model)."""
    if x.shape[-1] != config.d_model:
        raise ShapeError(f"transformer_block: expected width {config.d_model}, got input {x.shape}")
    prefix = f"block{layer}"
    attended, _ = self_attention(config, params, prefix, x)
    x = ops.layer_norm(ops.add(x, attended), params[f"{prefix}.ln1.gamma"], params[f"{prefix}.ln1.beta"])
    hidden = ops.relu(ops.linear(x, params[f"{prefix}.ff1.w"], params[f"{prefix}.ff1.b"]))
    ff = ops.linear(hidden, params[f"{prefix}.ff2.w"], params[f"{prefix}.ff2.b"])
    return ops.layer_norm(ops.add(x, ff), params[f"{prefix}.ln2.gamma"], params[f"{prefix}.ln2.beta"])


def embed(config: DecoderConfig, params: BoundGroup, combined: Tensor) -> Tensor:
    """Project (B, T, d_in) to d_model and add positions."""
    expected = params["proj.w"].shape[0]
    if len(combined.shape) != 3 or combined.shape[-1] != expected:
        raise ShapeError(f"decoder: expected input (B, T, {expected}), got {combined.shape}")
    x = ops.linear(combined, params["proj.w"], params["proj.b"])
    if config.positional_encoding == "sinusoidal":
        x = ops.add(x, Tensor(sinusoidal_positions(combined.shape[1], config.d_model)))
    return x


def decoder_forward(config: DecoderConfig, params: BoundGroup, combined: Tensor) -> Tensor:
    """
    One decoder branch.

    Args:
        combined: (B, T, d_in) combined encoder features

    Returns:
        (B, n_out, T) presence map
    """
    x = embed(config, params, combined)
    for layer in range(config.layers):
        x = transformer_block(config, params, layer, x)
    logits = ops.linear(x, params["head.w"], params["head.b"])
    if config.output_activation == "softmax":
        probs = ops.softmax(logits, axis=-1)
    else:
        probs = ops.sigmoid(logits)
    return ops.transpose(probs, (0, 2, 1))
