"""
Waveform I/O

PCM WAV decoding to mono 8 kHz float waveforms, and 16-bit PCM encoding.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

logger = logging.getLogger(__name__)

TARGET_SAMPLE_RATE = 8000

# WAVE format tags for the error message
_FORMAT_TAGS = {"f": 3, "i": 1, "u": 1}


class AudioFormatError(ValueError):
    """Raised for unsupported encodings and empty audio."""


@dataclass
class Waveform:
    """Mono audio samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = TARGET_SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise ValueError(f"Waveform samples must be 1-D, got shape {self.samples.shape}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    kind = data.dtype.kind
    tag = _FORMAT_TAGS.get(kind, "unknown")
    raise AudioFormatError(
        f"Unsupported WAV encoding: format tag {tag} ({data.dtype.itemsize * 8}-bit {data.dtype})"
    )


def resample(samples: np.ndarray, source_rate: int, target_rate: int = TARGET_SAMPLE_RATE) -> np.ndarray:
    """Windowed-sinc polyphase resampling."""
    if source_rate == target_rate:
        return samples
    ratio = Fraction(target_rate, source_rate)
    logger.debug("Resampling %d Hz -> %d Hz (%d/%d)", source_rate, target_rate, ratio.numerator, ratio.denominator)
    return resample_poly(samples, ratio.numerator, ratio.denominator, window=("kaiser", 5.0))


def load_wav(path: Union[str, Path]) -> Waveform:
    """
    Read a PCM WAV file as a mono 8 kHz waveform.

    Args:
        path: 8- or 16-bit PCM WAV, mono or stereo

    Returns:
        Waveform with stereo averaged to mono, resampled to 8000 Hz, in [-1, 1]
    """
    rate, data = wavfile.read(str(path))
    samples = _to_float(np.asarray(data))
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise AudioFormatError(f"Empty audio: {path}")
    samples = resample(samples, int(rate))
    return Waveform(samples=np.clip(samples, -1.0, 1.0), sample_rate=TARGET_SAMPLE_RATE)


def write_wav(path: Union[str, Path], wave: Waveform) -> Path:
    """Write a waveform as 16-bit PCM mono."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.round(np.clip(wave.samples, -1.0, 32767.0 / 32768.0) * 32768.0).astype(np.int16)
    wavfile.write(str(path), int(wave.sample_rate), pcm)
    return path
