"""
Tone-CFP Rearrangement

Groups frequency bins by tone: bin i joins set S_k with k = i mod L, and the
sets are laid out in order k = 0..L-1 with ascending i inside each set. Old
index i = m*L + k therefore lands at new index k*(F/L) + m, so bins one
octave apart sit next to each other.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PermutationPlan:
    """Index tables for the tone grouping; immutable once built."""

    num_bins: int
    bins_per_octave: int
    forward: np.ndarray  # new index -> old index
    inverse: np.ndarray  # old index -> new index

    def __post_init__(self):
        self.forward.setflags(write=False)
        self.inverse.setflags(write=False)


def build_permutation(num_bins: int, bins_per_octave: int) -> PermutationPlan:
    if bins_per_octave <= 0 or num_bins <= 0 or num_bins % bins_per_octave:
        raise ValueError(
            f"num_bins ({num_bins}) must be a positive multiple of bins_per_octave ({bins_per_octave})"
        )
    octaves = num_bins // bins_per_octave
    # forward[k * octaves + m] = m * L + k
    forward = np.arange(num_bins).reshape(octaves, bins_per_octave).T.reshape(-1).copy()
    inverse = np.empty_like(forward)
    inverse[forward] = np.arange(num_bins)
    return PermutationPlan(num_bins, bins_per_octave, forward, inverse)


def inverse_plan(plan: PermutationPlan) -> PermutationPlan:
    """Plan that undoes `plan`."""
    return PermutationPlan(plan.num_bins, plan.bins_per_octave, plan.inverse.copy(), plan.forward.copy())


def apply_rearrange(cfp: np.ndarray, plan: PermutationPlan) -> np.ndarray:
    """out[c, j, t] = cfp[c, forward[j], t]."""
    if cfp.ndim != 3 or cfp.shape[1] != plan.num_bins:
        raise ValueError(f"Frequency axis of shape {cfp.shape} does not match plan with {plan.num_bins} bins")
    return cfp[:, plan.forward, :]
