"""TONet Training"""

from .config import TRAIN_PRESETS, TrainConfig, train_config_for_preset
from .segments import Segment, segment_corpus
from .optim import AdamState, NonFiniteGradientError, adam_step
from .inference import predict_contour, predict_salience
from .trainer import TrainingDivergedError, TrainResult, evaluate_clips, train

__all__ = [
    "TRAIN_PRESETS",
    "TrainConfig",
    "train_config_for_preset",
    "Segment",
    "segment_corpus",
    "AdamState",
    "NonFiniteGradientError",
    "adam_step",
    "predict_contour",
    "predict_salience",
    "TrainingDivergedError",
    "TrainResult",
    "evaluate_clips",
    "train",
]
