"""
Pitch Labels

Maps between Hz contours, log-frequency bins, pitch-class/octave labels and
the one-hot training targets:
- Y_final  (F+1, T): row 0 is non-melody, row b+1 is pitch bin b
- Y_tone   (13, T):  rows 0..11 are C..B, row 12 is non-melody
- Y_octave (7, T):   rows 0..5 are octaves 1..6, row 6 is non-melody

Rounding is half-up for both bins and semitones.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd

F_MIN = 32.5
BINS_PER_OCTAVE = 60
NUM_BINS = 360
NUM_TONES = 13
NUM_OCTAVES = 7
FRAME_PERIOD = 0.01
GRID_TOLERANCE = 1e-4

NON_MELODY = -1
TONE_NON_MELODY = 12
OCTAVE_NON_MELODY = 6
MIN_OCTAVE, MAX_OCTAVE = 1, 6


class LabelError(ValueError):
    """Raised for invalid frequencies, octaves outside C1-B6 and misaligned grids."""


@dataclass
class PitchContour:
    """Time-stamped F0 in Hz; 0.0 marks an unvoiced frame."""

    times: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        if self.times.shape != self.freqs.shape or self.times.ndim != 1:
            raise LabelError(f"times {self.times.shape} and freqs {self.freqs.shape} must be matching 1-D arrays")
        if np.any(self.freqs < 0):
            raise LabelError("Contour frequencies must be >= 0")
        steps = np.diff(self.times)
        if np.any(~(steps > 0)):
            first = int(np.argmax(~(steps > 0))) + 1
            raise LabelError(
                f"Contour times must be strictly increasing; row {first} has {self.times[first]:.6f} "
                f"after {self.times[first - 1]:.6f}"
            )

    def __len__(self) -> int:
        return len(self.times)

    @property
    def voiced(self) -> np.ndarray:
        return self.freqs > 0

    @classmethod
    def on_grid(cls, freqs: Sequence[float], frame_period: float = FRAME_PERIOD) -> "PitchContour":
        freqs = np.asarray(freqs, dtype=np.float64)
        return cls(times=np.arange(len(freqs)) * frame_period, freqs=freqs)


@dataclass
class LabelMaps:
    """One-hot targets for one clip or segment."""

    final: np.ndarray
    tone: np.ndarray
    octave: np.ndarray

    @property
    def num_frames(self) -> int:
        return self.final.shape[1]

    @staticmethod
    def stack(maps: Sequence["LabelMaps"]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Batch into (B, F+1, T), (B, 13, T), (B, 7, T)."""
        return (
            np.stack([m.final for m in maps]),
            np.stack([m.tone for m in maps]),
            np.stack([m.octave for m in maps]),
        )


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5).astype(int)


def hz_to_bins(freqs, f_min: float = F_MIN, bins_per_octave: int = BINS_PER_OCTAVE, num_bins: int = NUM_BINS) -> np.ndarray:
    """Vectorized hz_to_bin; unvoiced frames map to NON_MELODY."""
    freqs = np.asarray(freqs, dtype=np.float64)
    if np.any(freqs < 0):
        raise LabelError(f"Negative frequency: {freqs[freqs < 0][0]}")
    voiced = freqs > 0
    safe = np.where(voiced, freqs, f_min)
    bins = np.clip(_round_half_up(bins_per_octave * np.log2(safe / f_min)), 0, num_bins - 1)
    return np.where(voiced, bins, NON_MELODY)


def hz_to_bin(f: float, **kwargs) -> int:
    """round(60 * log2(f / 32.5)) clamped to [0, 359]; NON_MELODY for f == 0."""
    return int(hz_to_bins(np.array([f]), **kwargs)[0])


def bin_to_hz(b, f_min: float = F_MIN, bins_per_octave: int = BINS_PER_OCTAVE) -> np.ndarray:
    return f_min * 2.0 ** (np.asarray(b, dtype=np.float64) / bins_per_octave)


def hz_to_midi(freqs) -> np.ndarray:
    """Nearest 12-TET semitone (MIDI numbering, A4 = 440 Hz = 69)."""
    freqs = np.asarray(freqs, dtype=np.float64)
    return _round_half_up(69.0 + 12.0 * np.log2(freqs / 440.0))


def hz_to_tone_octaves(freqs) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized hz_to_tone_octave."""
    freqs = np.asarray(freqs, dtype=np.float64)
    if np.any(freqs < 0):
        raise LabelError(f"Negative frequency: {freqs[freqs < 0][0]}")
    voiced = freqs > 0
    midi = hz_to_midi(np.where(voiced, freqs, 440.0))
    octave_number = midi // 12 - 1
    bad = voiced & ((octave_number < MIN_OCTAVE) | (octave_number > MAX_OCTAVE))
    if np.any(bad):
        raise LabelError(
            f"Frequency {freqs[bad][0]:.2f} Hz lies in octave {octave_number[bad][0]}, outside C1-B6"
        )
    tones = np.where(voiced, midi % 12, TONE_NON_MELODY)
    octaves = np.where(voiced, octave_number - MIN_OCTAVE, OCTAVE_NON_MELODY)
    return tones, octaves


def hz_to_tone_octave(f: float) -> Tuple[int, int]:
    """(pitch-class index, octave index); (12, 6) for unvoiced."""
    tones, octaves = hz_to_tone_octaves(np.array([f]))
    return int(tones[0]), int(octaves[0])


def check_grid(times: np.ndarray, frame_period: float = FRAME_PERIOD):
    if len(times) < 2:
        return
    deltas = np.diff(times)
    if np.any(np.abs(deltas - frame_period) > GRID_TOLERANCE):
        worst = deltas[np.argmax(np.abs(deltas - frame_period))]
        raise LabelError(f"Contour is not on a {frame_period * 1000:.0f} ms grid (found a step of {worst * 1000:.3f} ms)")


def contour_to_label_maps(contour: PitchContour, num_frames: int, num_bins: int = NUM_BINS) -> LabelMaps:
    """One-hot Y_final / Y_tone / Y_octave for the first `num_frames` frames."""
    if len(contour) < num_frames:
        raise LabelError(f"Contour has {len(contour)} frames, {num_frames} required")
    check_grid(contour.times[:num_frames])
    freqs = contour.freqs[:num_frames]
    frames = np.arange(num_frames)

    rows = hz_to_bins(freqs, num_bins=num_bins) + 1
    tones, octaves = hz_to_tone_octaves(freqs)

    final = np.zeros((num_bins + 1, num_frames))
    final[rows, frames] = 1.0
    tone = np.zeros((NUM_TONES, num_frames))
    tone[tones, frames] = 1.0
    octave = np.zeros((NUM_OCTAVES, num_frames))
    octave[octaves, frames] = 1.0
    return LabelMaps(final=final, tone=tone, octave=octave)


def salience_to_contour(final_map: np.ndarray, frame_period: float = FRAME_PERIOD) -> PitchContour:
    """Per-frame argmax decode; row 0 is unvoiced, ties go to the lowest row."""
    rows = np.argmax(final_map, axis=0)
    freqs = np.where(rows == 0, 0.0, bin_to_hz(rows - 1))
    return PitchContour.on_grid(freqs, frame_period)


def read_contour_csv(path: Union[str, Path]) -> PitchContour:
    """`time_seconds,frequency_hz` lines, no header."""
    frame = pd.read_csv(path, header=None, names=["time", "frequency"], dtype=np.float64)
    return PitchContour(times=frame["time"].to_numpy(), freqs=frame["frequency"].to_numpy())


def write_contour_csv(path: Union[str, Path], contour: PitchContour) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"time": contour.times, "frequency": contour.freqs})
    frame.to_csv(path, header=False, index=False, float_format="%.6f", lineterminator="\n")
    return path

