"""TONet DSP Front End"""

from .audio import AudioFormatError, Waveform, load_wav, write_wav
from .cfp import (
    CfpConfig,
    bin_centers,
    compute_cfp,
    compute_stft_power,
    extract_features,
    load_cfp,
    save_cfp,
)
from .tcfp import PermutationPlan, apply_rearrange, build_permutation, inverse_plan

__all__ = [
    "AudioFormatError",
    "Waveform",
    "load_wav",
    "write_wav",
    "CfpConfig",
    "bin_centers",
    "compute_cfp",
    "compute_stft_power",
    "extract_features",
    "load_cfp",
    "save_cfp",
    "PermutationPlan",
    "apply_rearrange",
    "build_permutation",
    "inverse_plan",
]
