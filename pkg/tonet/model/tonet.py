"""
TONet Graph

Two non-weight-sharing encoders (CFP and TCFP), tone and octave decoders
over the combined feature, a time-axis 1D-conv fusion head, and the
three-term BCE loss. Ablation variants drop parts of the graph:

    base  one CFP encoder, its salience is the output
    d     two encoders on CFP + fusion
    tc    CFP and TCFP encoders + fusion
    f     one CFP encoder + decoders + fusion
    full  everything
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..core import ops
from ..core.tensor import Graph, ShapeError, Tensor
from .backbones import backbone_forward, init_backbone
from .config import ModelConfig
from .decoder import decoder_forward, init_decoder
from .params import BoundGroup, ParamGroup, TONetParams


@dataclass
class ModelOutput:
    """Batched presence maps; tone/octave are None for variants without decoders."""

    final: Tensor  # (B, F+1, T)
    tone: Optional[Tensor] = None  # (B, P, T)
    octave: Optional[Tensor] = None  # (B, O, T)


def init_params(config: ModelConfig) -> TONetParams:
    """Kaiming-uniform weights, zero biases, drawn in group order from one seeded stream."""
    rng = np.random.default_rng(config.seed)
    groups = {"encoder_cfp": init_backbone(config.backbone, config.num_bins, rng)}
    if config.dual_encoder:
        groups["encoder_tcfp"] = init_backbone(config.backbone, config.num_bins, rng)
    if config.uses_decoders:
        groups["tone_decoder"] = init_decoder(config.decoder, config.combined_width, config.n_tones, rng)
        groups["octave_decoder"] = init_decoder(config.decoder, config.combined_width, config.n_octaves, rng)
    if config.variant != "base":
        fusion = ParamGroup()
        k = config.fusion_kernel
        fan_in = config.fusion_channels * k
        fusion.params["conv.w"] = ops.kaiming_uniform(rng, (config.salience_rows, config.fusion_channels, k), fan_in)
        fusion.params["conv.b"] = np.zeros(config.salience_rows)
        groups["fusion"] = fusion
    return TONetParams(groups)


def encode_pair(config: ModelConfig, bound, cfp: Tensor, tcfp: Tensor, training: bool = False) -> Tensor:
    """
    Run both encoders and join their salience maps frame by frame.

    Args:
        cfp: (B, 3, F, T) input of the first encoder
        tcfp: (B, 3, F, T) input of the second encoder

    Returns:
        (B, T, 2F+2) with the first encoder's features in the first F+1 columns
    """
    if cfp.shape != tcfp.shape:
        raise ShapeError(f"encode_pair: cannot combine shapes {cfp.shape} and {tcfp.shape}")
    first = backbone_forward(config.backbone, bound["encoder_cfp"], cfp, config.num_bins, training)
    second = backbone_forward(config.backbone, bound["encoder_tcfp"], tcfp, config.num_bins, training)
    return ops.concat([ops.transpose(first, (0, 2, 1)), ops.transpose(second, (0, 2, 1))], axis=2)


def decode_tone_octave(config: ModelConfig, bound, combined: Tensor) -> Tuple[Tensor, Tensor]:
    """(B, T, W) -> ((B, P, T) tone map, (B, O, T) octave map); branches share nothing."""
    tone = decoder_forward(config.decoder, bound["tone_decoder"], combined)
    octave = decoder_forward(config.decoder, bound["octave_decoder"], combined)
    return tone, octave


def fuse(
    config: ModelConfig,
    fusion: BoundGroup,
    combined: Tensor,
    tone: Optional[Tensor] = None,
    octave: Optional[Tensor] = None,
) -> Tensor:
    """
    Time-axis 1D convolution over [combined; tone; octave].

    Returns:
        (B, F+1, T) final presence map
    """
    features = [ops.transpose(combined, (0, 2, 1))]
    frames = combined.shape[1]
    for extra in (tone, octave):
        if extra is None:
            continue
        if extra.shape[-1] != frames:
            raise ShapeError(f"fuse: cannot combine shapes {combined.shape} and {extra.shape}")
        features.append(extra)
    stacked = ops.concat(features, axis=1) if len(features) > 1 else features[0]
    out = ops.conv1d(stacked, fusion["conv.w"], fusion["conv.b"], padding=config.fusion_kernel // 2)
    return ops.sigmoid(out)


def total_loss(
    tone: Optional[Tensor],
    octave: Optional[Tensor],
    final: Tensor,
    targets: Tuple[np.ndarray, np.ndarray, np.ndarray],
) -> Tensor:
    """
    L = BCE(tone) + BCE(octave) + BCE(final), each mean-reduced.

    Args:
        targets: (Y_final, Y_tone, Y_octave) arrays shaped like the predictions

    Missing tone/octave predictions drop their terms.
    """
    y_final, y_tone, y_octave = targets
    loss = ops.bce(final, Tensor(y_final))
    if tone is not None:
        loss = ops.add(loss, ops.bce(tone, Tensor(y_tone)))
    if octave is not None:
        loss = ops.add(loss, ops.bce(octave, Tensor(y_octave)))
    return loss


def _as_batch(x, num_bins: int) -> Tensor:
    x = x if isinstance(x, Tensor) else Tensor(x)
    if len(x.shape) == 3:
        x = Tensor(x.values[None])
    if len(x.shape) != 4 or x.shape[1:3] != (3, num_bins):
        raise ShapeError(f"forward: expected (B, 3, {num_bins}, T) features, got {x.shape}")
    return x


def forward(
    params: TONetParams,
    config: ModelConfig,
    cfp,
    tcfp=None,
    training: bool = False,
    graph: Optional[Graph] = None,
    overrides=None,
) -> ModelOutput:
    """
    Full variant-aware forward pass.

    Args:
        params: Model parameters
        config: Model configuration (variant selects the graph)
        cfp: (B, 3, F, T) or (3, F, T) CFP features
        tcfp: Matching TCFP features (needed by tc and full)
        training: Batch-norm batch statistics and running-stat updates
        graph: Register parameters on this graph as named leaves
        overrides: Full parameter names mapped to substitute tensors

    Returns:
        ModelOutput with batched tensors
    """
    cfp = _as_batch(cfp, config.num_bins)
    bound = params.bind(graph, overrides)

    if config.variant == "base":
        final = backbone_forward(config.backbone, bound["encoder_cfp"], cfp, config.num_bins, training)
        return ModelOutput(final=final)

    if config.dual_encoder:
        if config.uses_tcfp:
            if tcfp is None:
                raise ValueError(f"variant '{config.variant}' needs TCFP features")
            second = _as_batch(tcfp, config.num_bins)
        else:
            second = cfp
        combined = encode_pair(config, bound, cfp, second, training)
    else:
        single = backbone_forward(config.backbone, bound["encoder_cfp"], cfp, config.num_bins, training)
        combined = ops.transpose(single, (0, 2, 1))

    if not config.uses_decoders:
        return ModelOutput(final=fuse(config, bound["fusion"], combined))

    tone, octave = decode_tone_octave(config, bound, combined)
    final = fuse(config, bound["fusion"], combined, tone, octave)
    return ModelOutput(final=final, tone=tone, octave=octave)


def model_loss(output: ModelOutput, targets: Tuple[np.ndarray, np.ndarray, np.ndarray]) -> Tensor:
    return total_loss(output.tone, output.octave, output.final, targets)
