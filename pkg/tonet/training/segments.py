"""
Segmentation

Clips are cut into non-overlapping windows of `segment_frames` (128 frames,
1.28 s). The trailing window is zero-padded in the features and labelled
non-melody on the padded frames. CFP is computed once per clip and TCFP is
derived from it through the stored permutation.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from ..data.corpus import Clip
from ..data.labels import LabelMaps, PitchContour, contour_to_label_maps
from ..dsp.cfp import CfpConfig, extract_features
from ..dsp.tcfp import PermutationPlan, apply_rearrange

logger = logging.getLogger(__name__)


@dataclass
class Segment:
    cfp: np.ndarray  # (3, F, frames)
    tcfp: np.ndarray  # (3, F, frames)
    labels: LabelMaps
    clip_id: str
    offset: int  # first frame within the clip
    valid: int  # frames before padding


@dataclass
class ClipFeatures:
    """Whole-clip features and targets, before cutting."""

    clip_id: str
    cfp: np.ndarray
    tcfp: np.ndarray
    contour: PitchContour  # reference fitted to the feature frame count

    @property
    def num_frames(self) -> int:
        return self.cfp.shape[2]


def fit_contour(contour: PitchContour, num_frames: int, frame_period: float = 0.01) -> PitchContour:
    """Truncate, or extend with unvoiced frames on the same grid, to `num_frames`."""
    if len(contour) >= num_frames:
        return PitchContour(times=contour.times[:num_frames], freqs=contour.freqs[:num_frames])
    start = contour.times[-1] + frame_period if len(contour) else 0.0
    extra = num_frames - len(contour)
    times = np.concatenate([contour.times, start + np.arange(extra) * frame_period])
    freqs = np.concatenate([contour.freqs, np.zeros(extra)])
    return PitchContour(times=times, freqs=freqs)


def pad_frames(array: np.ndarray, num_frames: int) -> np.ndarray:
    """Zero-pad the last axis up to `num_frames`."""
    missing = num_frames - array.shape[-1]
    if missing <= 0:
        return array
    widths = [(0, 0)] * (array.ndim - 1) + [(0, missing)]
    return np.pad(array, widths)


def clip_features(
    clips: Sequence[Clip],
    cfp_config: CfpConfig,
    plan: PermutationPlan,
    workers: int = 1,
    progress: bool = False,
) -> List[ClipFeatures]:
    """CFP/TCFP for every usable clip; clips shorter than one window are skipped with a warning."""
    usable = []
    for clip in clips:
        if len(clip.wave) < cfp_config.window:
            logger.warning(
                "Skipping clip %s: %d samples is shorter than one %d-sample window",
                clip.clip_id, len(clip.wave), cfp_config.window,
            )
            continue
        usable.append(clip)

    cfps = extract_features([c.wave for c in usable], cfp_config, workers=workers, progress=progress)
    return [
        ClipFeatures(
            clip_id=clip.clip_id,
            cfp=cfp,
            tcfp=apply_rearrange(cfp, plan),
            contour=fit_contour(clip.contour, cfp.shape[2], cfp_config.frame_period),
        )
        for clip, cfp in zip(usable, cfps)
    ]


def cut_segments(features: ClipFeatures, segment_frames: int = 128) -> List[Segment]:
    total = features.num_frames
    count = -(-total // segment_frames)
    padded_len = count * segment_frames
    labels = contour_to_label_maps(
        fit_contour(features.contour, padded_len), padded_len, num_bins=features.cfp.shape[1]
    )
    cfp = pad_frames(features.cfp, padded_len)
    tcfp = pad_frames(features.tcfp, padded_len)

    segments = []
    for i in range(count):
        lo, hi = i * segment_frames, (i + 1) * segment_frames
        segments.append(
            Segment(
                cfp=cfp[:, :, lo:hi],
                tcfp=tcfp[:, :, lo:hi],
                labels=LabelMaps(final=labels.final[:, lo:hi], tone=labels.tone[:, lo:hi], octave=labels.octave[:, lo:hi]),
                clip_id=features.clip_id,
                offset=lo,
                valid=min(segment_frames, total - lo),
            )
        )
    return segments


def segment_corpus(
    clips: Sequence[Clip],
    cfp_config: CfpConfig,
    plan: PermutationPlan,
    segment_frames: int = 128,
    workers: int = 1,
    progress: bool = False,
) -> List[Segment]:
    """
    Cut a corpus into training segments.

    Returns:
        Segments in clip order, then time order; empty for an empty corpus
    """
    segments: List[Segment] = []
    for features in clip_features(clips, cfp_config, plan, workers, progress):
        segments.extend(cut_segments(features, segment_frames))
    return segments


def stack_batch(segments: Sequence[Segment]) -> Tuple[np.ndarray, np.ndarray, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """(cfp (B,3,F,T), tcfp (B,3,F,T), (Y_final, Y_tone, Y_octave))."""
    cfp = np.stack([s.cfp for s in segments])
    tcfp = np.stack([s.tcfp for s in segments])
    return cfp, tcfp, LabelMaps.stack([s.labels for s in segments])


def iterate_batches(count: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Seeded shuffle, then consecutive batches (the last one may be short)."""
    order = rng.permutation(count)
    for start in range(0, count, batch_size):
        yield order[start:start + batch_size]
