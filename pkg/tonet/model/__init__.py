"""TONet Model"""

from .config import (
    PRESETS,
    VARIANTS,
    BackboneSpec,
    DecoderConfig,
    ModelConfig,
    format_model_config,
    load_model_config,
    model_config_for_preset,
    save_model_config,
)
from .params import GROUP_ORDER, TONetParams, load_params, save_params
from .backbones import backbone_forward
from .decoder import transformer_block
from .tonet import (
    ModelOutput,
    decode_tone_octave,
    encode_pair,
    forward,
    fuse,
    init_params,
    model_loss,
    total_loss,
)

__all__ = [
    "PRESETS",
    "VARIANTS",
    "BackboneSpec",
    "DecoderConfig",
    "ModelConfig",
    "format_model_config",
    "load_model_config",
    "model_config_for_preset",
    "save_model_config",
    "GROUP_ORDER",
    "TONetParams",
    "load_params",
    "save_params",
    "backbone_forward",
    "transformer_block",
    "ModelOutput",
    "decode_tone_octave",
    "encode_pair",
    "forward",
    "fuse",
    "init_params",
    "model_loss",
    "total_loss",
]
