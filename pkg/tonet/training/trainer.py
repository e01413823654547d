"""
Trainer

Epoch loop: seeded shuffle, batch, forward, loss, backward, Adam. After
each epoch the held-out clips are scored and a row is appended to
metrics.csv; the best held-out OA checkpoint is kept as best.ckpt and the
latest finite parameters as last.ckpt.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..core.tensor import Graph, backward
from ..data.corpus import Clip
from ..data.labels import salience_to_contour
from ..dsp.cfp import CfpConfig
from ..dsp.tcfp import build_permutation
from ..evaluation.metrics import METRIC_NAMES, EvalResult, average_results, evaluate_pair
from ..model.config import ModelConfig, save_model_config, to_flat
from ..model.params import TONetParams, save_params
from ..model.tonet import forward, init_params, model_loss
from ..utils import echo_config, save_output
from .config import TrainConfig
from .inference import predict_salience
from .optim import AdamState, adam_step
from .segments import ClipFeatures, clip_features, cut_segments, iterate_batches, stack_batch

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["epoch", "loss", *METRIC_NAMES]


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; the last good checkpoint is left in place."""

    def __init__(self, epoch: int, step: int, checkpoint: Path):
        super().__init__(
            f"Training diverged at epoch {epoch}, step {step} (loss is not finite); "
            f"last good checkpoint: {checkpoint}"
        )
        self.epoch = epoch
        self.step = step
        self.checkpoint = checkpoint


@dataclass
class TrainResult:
    params: TONetParams
    history: pd.DataFrame
    step_losses: List[float] = field(default_factory=list)
    best_epoch: int = 0
    best_oa: float = -1.0
    out_dir: Optional[Path] = None

    @property
    def metrics_path(self) -> Path:
        return self.out_dir / "metrics.csv"

    @property
    def best_path(self) -> Path:
        return self.out_dir / "best.ckpt"

    @property
    def last_path(self) -> Path:
        return self.out_dir / "last.ckpt"


def split_holdout(clips: Sequence[Clip], fraction: float) -> Tuple[List[Clip], List[Clip]]:
    """Last `fraction` of clips by sorted id are held out."""
    ordered = sorted(clips, key=lambda c: c.clip_id)
    held = int(len(ordered) * fraction)
    if held == 0:
        return ordered, []
    return ordered[:-held], ordered[-held:]


def evaluate_clips(
    params: TONetParams,
    config: ModelConfig,
    features: Sequence[ClipFeatures],
    segment_frames: int = 128,
    frame_period: float = 0.01,
) -> EvalResult:
    """Mean of per-clip metrics over whole-clip predictions."""
    results = []
    for clip in features:
        salience = predict_salience(params, config, clip.cfp, clip.tcfp, segment_frames)
        estimate = salience_to_contour(salience, frame_period)
        estimate.times = clip.contour.times.copy()
        results.append(evaluate_pair(estimate, clip.contour))
    return average_results(results)


def train(
    corpus: Sequence[Clip],
    model_config: ModelConfig,
    train_config: TrainConfig,
    out_dir: Union[str, Path],
    cfp_config: CfpConfig = CfpConfig(),
) -> TrainResult:
    """
    Train a TONet variant on a corpus.

    Args:
        corpus: Clips with aligned contours
        model_config: Architecture, variant and init seed
        train_config: Optimizer, batching, epochs and shuffle seed
        out_dir: Receives metrics.csv, best.ckpt, last.ckpt, model.cfg, config.txt

    Returns:
        TrainResult with the final parameters and the per-epoch history
    """
    if not corpus:
        raise ValueError("Training corpus is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_model_config(out_dir / "model.cfg", model_config)
    echo_config(out_dir, {"model": to_flat(model_config), "train": train_config.model_dump(), "cfp": cfp_config.model_dump()})

    plan = build_permutation(model_config.num_bins, model_config.bins_per_octave)
    train_clips, held_clips = split_holdout(corpus, train_config.holdout_fraction)
    train_features = clip_features(train_clips, cfp_config, plan, train_config.workers, train_config.progress)
    segments = [s for f in train_features for s in cut_segments(f, train_config.segment_frames)]
    if not segments:
        raise ValueError("No usable training segments (every clip was skipped)")

    if held_clips:
        eval_features = clip_features(held_clips, cfp_config, plan, train_config.workers)
    else:
        logger.info("Held-out split is empty (%d clips); scoring the training clips", len(train_clips))
        eval_features = train_features
    logger.info(
        "Training variant '%s' on %d segments from %d clips, %d held-out clips",
        model_config.variant, len(segments), len(train_features), len(held_clips),
    )

    params = init_params(model_config)
    state = AdamState()
    rng = np.random.default_rng(train_config.seed)
    result = TrainResult(params=params, history=pd.DataFrame(columns=LOG_COLUMNS), out_dir=out_dir)
    save_params(result.last_path, params)

    rows = []
    step = 0
    epochs = tqdm(range(1, train_config.epochs + 1), desc="epochs", disable=not train_config.progress)
    for epoch in epochs:
        losses = []
        for indices in iterate_batches(len(segments), train_config.batch_size, rng):
            cfp, tcfp, targets = stack_batch([segments[i] for i in indices])
            with Graph() as graph:
                output = forward(params, model_config, cfp, tcfp, training=True, graph=graph)
                loss = model_loss(output, targets)
            step += 1
            value = loss.item()
            if not np.isfinite(value):
                logger.error("Loss is %s at epoch %d, step %d", value, epoch, step)
                raise TrainingDivergedError(epoch, step, result.last_path)
            adam_step(params, backward(graph, loss), state, train_config)
            losses.append(value)
            result.step_losses.append(value)

        scores = evaluate_clips(params, model_config, eval_features, train_config.segment_frames, cfp_config.frame_period)
        row = {"epoch": epoch, "loss": float(np.mean(losses)), **scores.metrics()}
        rows.append(row)
        result.history = pd.DataFrame(rows, columns=LOG_COLUMNS)
        save_output(result.history, "Metrics log", result.metrics_path, float_format="%.8f")
        logger.info(
            "epoch %d loss %.6f rpa %.4f roa %.4f oa %.4f", epoch, row["loss"], scores.rpa, scores.roa, scores.oa
        )

        if scores.oa > result.best_oa:
            result.best_oa = scores.oa
            result.best_epoch = epoch
            save_params(result.best_path, params)
        save_params(result.last_path, params)

    return result
