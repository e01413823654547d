"""Segment-wise inference on whole clips."""

from typing import Optional

import numpy as np

from ..data.labels import PitchContour, salience_to_contour
from ..dsp.audio import Waveform
from ..dsp.cfp import CfpConfig, compute_cfp
from ..dsp.tcfp import PermutationPlan, apply_rearrange, build_permutation
from ..model.config import ModelConfig
from ..model.params import TONetParams
from ..model.tonet import forward
from .segments import pad_frames


def predict_salience(
    params: TONetParams,
    config: ModelConfig,
    cfp: np.ndarray,
    tcfp: Optional[np.ndarray] = None,
    segment_frames: int = 128,
) -> np.ndarray:
    """
    Final presence map for a whole clip.

    Args:
        cfp: (3, F, T) clip features
        tcfp: (3, F, T) rearranged features (derived when omitted)

    Returns:
        (F+1, T) map with padding trimmed
    """
    total = cfp.shape[2]
    if tcfp is None:
        tcfp = apply_rearrange(cfp, build_permutation(config.num_bins, config.bins_per_octave))
    count = max(1, -(-total // segment_frames))
    padded = count * segment_frames

    def batch(x: np.ndarray) -> np.ndarray:
        x = pad_frames(x, padded)
        # (3, F, count*S) -> (count, 3, F, S)
        return x.reshape(x.shape[0], x.shape[1], count, segment_frames).transpose(2, 0, 1, 3)

    output = forward(params, config, batch(cfp), batch(tcfp), training=False)
    final = output.final.values  # (count, F+1, S)
    stitched = final.transpose(1, 0, 2).reshape(final.shape[1], padded)
    return stitched[:, :total]


def predict_contour(
    params: TONetParams,
    config: ModelConfig,
    wave: Waveform,
    cfp_config: CfpConfig = CfpConfig(),
    plan: Optional[PermutationPlan] = None,
    segment_frames: int = 128,
) -> PitchContour:
    """Waveform -> decoded contour on the 10 ms grid."""
    cfp = compute_cfp(wave, cfp_config)
    plan = plan or build_permutation(config.num_bins, config.bins_per_octave)
    salience = predict_salience(params, config, cfp, apply_rearrange(cfp, plan), segment_frames)
    return salience_to_contour(salience, cfp_config.frame_period)
