"""Training configuration and presets."""

from typing import Any, Dict, Tuple

from pydantic import BaseModel, Field

TRAIN_PRESETS: Dict[str, Dict[str, Any]] = {
    "paper": {"learning_rate": 1e-4, "batch_size": 16, "epochs": 200},
    # desk runs step 10x larger
    "desk": {"learning_rate": 1e-3, "batch_size": 4, "epochs": 200},
}


class TrainConfig(BaseModel):
    preset: str = "desk"
    learning_rate: float = Field(default=1e-4, gt=0.0)
    batch_size: int = Field(default=16, ge=1)
    betas: Tuple[float, float] = (0.9, 0.999)
    epsilon: float = Field(default=1e-8, gt=0.0)
    epochs: int = Field(default=200, ge=1)
    seed: int = 0
    segment_frames: int = Field(default=128, ge=1)
    holdout_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)
    workers: int = Field(default=1, ge=1)
    progress: bool = False


def train_config_for_preset(preset: str = "desk", **overrides: Any) -> TrainConfig:
    if preset not in TRAIN_PRESETS:
        raise ValueError(f"Unknown preset '{preset}' (choose from {sorted(TRAIN_PRESETS)})")
    values = dict(TRAIN_PRESETS[preset], preset=preset)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return TrainConfig(**values)
