"""
Model Configuration

pydantic models for the backbone, decoder and full TONet graph, the two
built-in presets, and the `key=value` model-config file format.

Resolution order: preset < config file < explicit overrides.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Union

from pydantic import BaseModel, Field, model_validator

logger = logging.getLogger(__name__)

Variant = Literal["base", "d", "tc", "f", "full"]
VARIANTS = ("base", "d", "tc", "f", "full")


class BackboneSpec(BaseModel):
    """Encoder backbone: input (B, 3, F, T) -> salience (B, F+1, T)."""

    kind: Literal["mlp", "conv-encdec"] = "mlp"
    mlp_hidden: int = Field(default=256, ge=1)
    conv_channels: List[int] = [8, 16, 32]
    conv_kernel: int = Field(default=5, ge=1)
    pool_kernels: List[int] = [4, 3, 6]  # (k x 1) pools along frequency

    @model_validator(mode="after")
    def _check_conv(self) -> "BackboneSpec":
        if len(self.conv_channels) != len(self.pool_kernels):
            raise ValueError(
                f"conv_channels {self.conv_channels} and pool_kernels {self.pool_kernels} must have equal length"
            )
        if self.conv_kernel % 2 == 0:
            raise ValueError(f"conv_kernel must be odd, got {self.conv_kernel}")
        return self


class DecoderConfig(BaseModel):
    """Transformer tone/octave decoder."""

    d_model: int = Field(default=64, ge=1)
    heads: int = Field(default=4, ge=1)
    layers: int = Field(default=2, ge=1)
    ff_width: int = Field(default=256, ge=1)
    positional_encoding: Literal["sinusoidal", "none"] = "sinusoidal"
    output_activation: Literal["sigmoid", "softmax"] = "sigmoid"

    @model_validator(mode="after")
    def _check_heads(self) -> "DecoderConfig":
        if self.d_model % self.heads:
            raise ValueError(f"d_model ({self.d_model}) must be divisible by heads ({self.heads})")
        return self

    @property
    def head_width(self) -> int:
        return self.d_model // self.heads


class ModelConfig(BaseModel):
    preset: str = "desk"
    variant: Variant = "full"
    seed: int = 0
    num_bins: int = 360
    bins_per_octave: int = 60
    n_tones: int = 13
    n_octaves: int = 7
    fusion_kernel: int = 5
    backbone: BackboneSpec = BackboneSpec()
    decoder: DecoderConfig = DecoderConfig()

    @model_validator(mode="after")
    def _check_geometry(self) -> "ModelConfig":
        if self.num_bins % self.bins_per_octave:
            raise ValueError(
                f"num_bins ({self.num_bins}) must be a multiple of bins_per_octave ({self.bins_per_octave})"
            )
        if self.fusion_kernel % 2 == 0:
            raise ValueError(f"fusion_kernel must be odd, got {self.fusion_kernel}")
        if self.backbone.kind == "conv-encdec":
            total = 1
            for k in self.backbone.pool_kernels:
                total *= k
            if self.num_bins % total:
                raise ValueError(
                    f"num_bins ({self.num_bins}) is not divisible by the pool product {total}"
                )
        return self

    @property
    def salience_rows(self) -> int:
        return self.num_bins + 1

    @property
    def dual_encoder(self) -> bool:
        return self.variant in ("d", "tc", "full")

    @property
    def uses_decoders(self) -> bool:
        return self.variant in ("f", "full")

    @property
    def uses_tcfp(self) -> bool:
        return self.variant in ("tc", "full")

    @property
    def combined_width(self) -> int:
        """Feature width after encode_pair: 2F+2 with two encoders, F+1 with one."""
        return self.salience_rows * (2 if self.dual_encoder else 1)

    @property
    def fusion_channels(self) -> int:
        """Fusion conv input channels: 2F+2+P+O for the full graph."""
        extra = self.n_tones + self.n_octaves if self.uses_decoders else 0
        return self.combined_width + extra


# ===== Presets =====

PRESETS: Dict[str, Dict[str, Any]] = {
    "paper": {
        "backbone": "conv-encdec",
        "mlp_hidden": 1024,
        "conv_channels": [32, 64, 128],
        "d_model": 1024,
        "heads": 8,
        "layers": 2,
        "ff_width": 4096,
    },
    "desk": {
        "backbone": "mlp",
        "mlp_hidden": 256,
        "conv_channels": [8, 16, 32],
        "d_model": 64,
        "heads": 4,
        "layers": 2,
        "ff_width": 256,
    },
}

_BACKBONE_KEYS = {"backbone": "kind", "mlp_hidden": "mlp_hidden", "conv_channels": "conv_channels",
                  "conv_kernel": "conv_kernel", "pool_kernels": "pool_kernels"}
_DECODER_KEYS = ("d_model", "heads", "layers", "ff_width", "positional_encoding", "output_activation")
_TOP_KEYS = ("preset", "variant", "seed", "num_bins", "bins_per_octave", "n_tones", "n_octaves", "fusion_kernel")
_LIST_KEYS = ("conv_channels", "pool_kernels")
_INT_KEYS = ("seed", "num_bins", "bins_per_octave", "n_tones", "n_octaves", "fusion_kernel",
             "mlp_hidden", "conv_kernel", "d_model", "heads", "layers", "ff_width")

CONFIG_KEYS = _TOP_KEYS + tuple(_BACKBONE_KEYS) + _DECODER_KEYS


def _from_flat(flat: Dict[str, Any]) -> ModelConfig:
    unknown = set(flat) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"Unknown model config keys: {sorted(unknown)}")
    top = {k: flat[k] for k in _TOP_KEYS if k in flat}
    backbone = {field: flat[k] for k, field in _BACKBONE_KEYS.items() if k in flat}
    decoder = {k: flat[k] for k in _DECODER_KEYS if k in flat}
    return ModelConfig(**top, backbone=BackboneSpec(**backbone), decoder=DecoderConfig(**decoder))


def to_flat(config: ModelConfig) -> Dict[str, Any]:
    """Flat key -> value view, in CONFIG_KEYS order."""
    flat: Dict[str, Any] = {k: getattr(config, k) for k in _TOP_KEYS}
    flat.update({k: getattr(config.backbone, field) for k, field in _BACKBONE_KEYS.items()})
    flat.update({k: getattr(config.decoder, k) for k in _DECODER_KEYS})
    return flat


def model_config_for_preset(preset: str = "desk", **overrides: Any) -> ModelConfig:
    """
    Resolve a preset plus flat-key overrides.

    Args:
        preset: "paper" or "desk"
        **overrides: Flat config keys (None values are ignored)

    Returns:
        Validated ModelConfig
    """
    if preset not in PRESETS:
        raise ValueError(f"Unknown preset '{preset}' (choose from {sorted(PRESETS)})")
    flat = dict(PRESETS[preset])
    flat["preset"] = preset
    flat.update({k: v for k, v in overrides.items() if v is not None})
    return _from_flat(flat)


def _parse_value(key: str, raw: str) -> Any:
    if key in _LIST_KEYS:
        return [int(v) for v in raw.split(",") if v.strip()]
    if key in _INT_KEYS:
        return int(raw)
    return raw


def parse_config_text(text: str) -> Dict[str, Any]:
    """Parse `key=value` lines; `#` starts a comment."""
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"Line {number}: expected key=value, got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"Line {number}: unknown key '{key}'")
        try:
            values[key] = _parse_value(key, value)
        except ValueError:
            raise ValueError(f"Line {number}: invalid value '{value}' for '{key}'") from None
    return values


def load_model_config(path: Union[str, Path], **overrides: Any) -> ModelConfig:
    """Preset named in the file (default desk) < file values < overrides."""
    values = parse_config_text(Path(path).read_text())
    values.update({k: v for k, v in overrides.items() if v is not None})
    preset = values.pop("preset", "desk")
    return model_config_for_preset(preset, **values)


def format_model_config(config: ModelConfig) -> str:
    lines = []
    for key, value in to_flat(config).items():
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def save_model_config(path: Union[str, Path], config: ModelConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_model_config(config))
    logger.debug("Wrote model config to %s", path)
    return path
