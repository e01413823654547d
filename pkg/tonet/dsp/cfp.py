"""
CFP Front End

Combined frequency and periodicity representation on a log-frequency axis:
- Channel 0: power-scaled spectrogram
- Channel 1: generalized cepstrum (GC), read on the period axis
- Channel 2: generalized cepstrum of spectrum (GCoS)

Framing follows the 8 kHz / 768-sample window / 80-sample hop setup, so one
frame is 10 ms and a 128-frame segment is 1.28 s.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.signal import get_window
from tqdm import tqdm

from .audio import Waveform

logger = logging.getLogger(__name__)

CFP_MAGIC = b"TONETCFP1"
ENVELOPE_FLOOR = 1e-3

# (3, F, T) float64 array, every entry >= 0, per-channel max <= 1
CfpTensor = np.ndarray


class CfpConfig(BaseModel):
    """DSP hyper-parameters of the CFP front end."""

    sample_rate: int = 8000
    window: int = 768
    hop: int = 80
    bins_per_octave: int = 60
    num_bins: int = 360
    f_min: float = 32.5
    f_max: float = 2050.0
    gammas: Tuple[float, float, float] = (0.24, 0.6, 1.0)
    freq_cutoff: float = 32.5  # g_c, Hz
    quefrency_cutoff: float = 1.0 / 2050.0  # q_c, seconds
    fft_size: int = 16384
    mapping: Literal["linear", "nearest"] = "linear"
    # share of the window's lag envelope divided out before reading periods
    envelope_power: float = Field(default=0.9, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check_geometry(self) -> "CfpConfig":
        if self.num_bins % self.bins_per_octave:
            raise ValueError(
                f"num_bins ({self.num_bins}) must be a multiple of bins_per_octave ({self.bins_per_octave})"
            )
        if self.f_min * 2.0 ** (self.num_bins / self.bins_per_octave) < self.f_max:
            raise ValueError(f"{self.num_bins} bins from {self.f_min} Hz do not reach f_max={self.f_max} Hz")
        if self.window <= self.hop:
            raise ValueError(f"window ({self.window}) must exceed hop ({self.hop})")
        if self.fft_size < 2 * self.window or self.fft_size % 2:
            raise ValueError(f"fft_size must be even and at least twice the window, got {self.fft_size}")
        return self

    @property
    def frame_period(self) -> float:
        return self.hop / self.sample_rate


def bin_centers(config: CfpConfig) -> np.ndarray:
    """f_b = f_min * 2^(b / L) for b in [0, F)."""
    return config.f_min * 2.0 ** (np.arange(config.num_bins) / config.bins_per_octave)


def num_frames(num_samples: int, hop: int) -> int:
    return -(-num_samples // hop)


def _frames(wave: Waveform, config: CfpConfig) -> np.ndarray:
    if wave.sample_rate != config.sample_rate:
        raise ValueError(f"Waveform is at {wave.sample_rate} Hz, config expects {config.sample_rate} Hz")
    if len(wave) < config.window:
        raise ValueError(
            f"Waveform of {len(wave)} samples is shorter than one {config.window}-sample window"
        )
    half = config.window // 2
    padded = np.pad(wave.samples, (half, half), mode="reflect")
    count = num_frames(len(wave), config.hop)
    frames = np.lib.stride_tricks.sliding_window_view(padded, config.window)[:: config.hop][:count]
    return frames * get_window("hann", config.window)


def compute_stft_power(wave: Waveform, config: CfpConfig = CfpConfig()) -> np.ndarray:
    """
    Centered Hann STFT power.

    Returns:
        (window / 2 + 1, T) power frames with T = ceil(len / hop)
    """
    spectrum = np.fft.rfft(_frames(wave, config), n=config.window, axis=-1)
    return (np.abs(spectrum) ** 2).T


@lru_cache(maxsize=8)
def _quefrency_basis(sample_rate: int, fft_size: int, f_min: float, bins_per_octave: int, num_bins: int) -> np.ndarray:
    """Cosine basis evaluating the inverse real DFT at each log bin's period (fractional lag)."""
    lags = sample_rate / (f_min * 2.0 ** (np.arange(num_bins) / bins_per_octave))
    k = np.arange(fft_size // 2 + 1)
    weights = np.full(k.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    return weights[:, None] * np.cos(2.0 * np.pi * np.outer(k, lags) / fft_size) / fft_size


def _linear_to_log(grid: np.ndarray, positions: np.ndarray, mapping: str) -> np.ndarray:
    """Read a uniformly sampled (T, K) array at fractional column positions."""
    if mapping == "nearest":
        return grid[:, np.round(positions).astype(int)]
    lo = np.floor(positions).astype(int)
    frac = positions - lo
    return grid[:, lo] * (1.0 - frac) + grid[:, lo + 1] * frac


@lru_cache(maxsize=8)
def _lag_envelope(
    window: int, sample_rate: int, fft_size: int, gamma: float, f_min: float, bins_per_octave: int, num_bins: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inverse DFT of the compressed Hann line shape, scaled to 1 at lag 0.

    A steady sinusoid's Z0 row inverts to this envelope times cos(2 pi f tau).

    Returns:
        (envelope on the integer lag grid, envelope at each log bin's period)
    """
    shape = np.abs(np.fft.rfft(get_window("hann", window), n=fft_size)) ** (2.0 * gamma)
    on_grid = np.fft.irfft(shape, n=fft_size)
    at_bins = shape @ _quefrency_basis(sample_rate, fft_size, f_min, bins_per_octave, num_bins)
    return on_grid / on_grid[0], at_bins / on_grid[0]


def _flatten(values: np.ndarray, envelope: np.ndarray, power: float) -> np.ndarray:
    scale = np.maximum(np.abs(envelope), ENVELOPE_FLOOR) ** power
    return values / np.copysign(scale, envelope)


def _period_salience(
    acf: np.ndarray, acf_at_bins: np.ndarray, envelope: Tuple[np.ndarray, np.ndarray], lags: np.ndarray, power: float
) -> np.ndarray:
    """
    Periodicity of each frame at each bin's period, in [0, 1].

    The inverse DFT r is divided by the window's lag envelope^power, giving
    d(tau) = 2 (r(0) - r_flat(tau)). Dividing d by its running mean over lags
    1..tau keeps the lobe around lag 0 at or above 1, so the deepest dip is
    the first period rather than the smallest lag. Returns 1 - d'(tau) clipped at 0.
    """
    on_grid, at_bins = envelope
    top = int(np.ceil(lags.max())) + 1
    running = np.cumsum(2.0 * (acf[:, :1] - _flatten(acf[:, : top + 1], on_grid[: top + 1], power)), axis=-1)
    lo = np.floor(lags).astype(int)
    frac = lags - lo
    mean = (running[:, lo] * (1.0 - frac) + running[:, lo + 1] * frac) / lags
    diff = 2.0 * (acf[:, :1] - _flatten(acf_at_bins, at_bins, power))
    ratio = np.divide(diff, mean, out=np.ones_like(diff), where=mean > 0)
    return np.maximum(1.0 - ratio, 0.0)


def compute_cfp(wave: Waveform, config: CfpConfig = CfpConfig()) -> CfpTensor:
    """
    CFP cascade mapped onto F log-spaced bins.

    Z0 = rect(power)^g0; Z1 = rect(IDFT(Z0))^g1 with quefrencies below q_c
    zeroed; Z2 = rect(DFT(Z1))^g2 with frequencies below g_c zeroed. Each
    channel is scaled to peak 1 per clip (all-zero channels stay zero).

    The GC channel is read at each bin's exact period from the
    envelope-flattened, running-mean-normalized IDFT (see `_period_salience`),
    and the window's rectified lag envelope is projected out of Z1 before the
    GCoS DFT, so a steady tone peaks at its own bin on every channel.
    `mapping` applies to the frequency-indexed channels (power and GCoS).

    Returns:
        (3, F, T) nonnegative array
    """
    n = config.fft_size
    sr = config.sample_rate
    g0, g1, g2 = config.gammas
    centers = bin_centers(config)
    lags = sr / centers
    envelope = _lag_envelope(config.window, sr, n, g0, config.f_min, config.bins_per_octave, config.num_bins)

    power = np.abs(np.fft.rfft(_frames(wave, config), n=n, axis=-1)) ** 2
    z0 = np.maximum(power, 0.0) ** g0

    lag = np.arange(n)
    min_lag = config.quefrency_cutoff * sr
    keep_lag = (lag >= min_lag) & (lag <= n - min_lag)
    acf = np.fft.irfft(z0, n=n, axis=-1)
    z1 = np.maximum(acf, 0.0) ** g1 * keep_lag

    dc_shape = np.abs(envelope[0]) ** g1 * keep_lag
    dc_level = (z1 @ dc_shape) / (dc_shape @ dc_shape)
    freqs = np.arange(n // 2 + 1) * sr / n
    z1_ac = z1 - dc_level[:, None] * dc_shape
    z2 = np.maximum(np.fft.rfft(z1_ac, n=n, axis=-1).real, 0.0) ** g2 * (freqs >= config.freq_cutoff)

    positions = centers * n / sr
    spec_log = _linear_to_log(z0, positions, config.mapping)
    gcos_log = _linear_to_log(z2, positions, config.mapping)

    basis = _quefrency_basis(sr, n, config.f_min, config.bins_per_octave, config.num_bins)
    salience = _period_salience(acf, z0 @ basis, envelope, lags, config.envelope_power)
    gc_log = salience ** g1 * (lags >= min_lag)

    cfp = np.stack([spec_log.T, gc_log.T, gcos_log.T])
    peaks = cfp.max(axis=(1, 2), keepdims=True)
    return np.divide(cfp, peaks, out=np.zeros_like(cfp), where=peaks > 0)


def extract_features(
    waves: Sequence[Waveform], config: CfpConfig = CfpConfig(), workers: int = 1, progress: bool = False
) -> List[CfpTensor]:
    """Compute CFP for many clips, fanning out per clip."""
    waves = list(waves)
    if workers <= 1:
        iterator = (compute_cfp(w, config) for w in waves)
        return list(tqdm(iterator, total=len(waves), desc="CFP", disable=not progress))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(lambda w: compute_cfp(w, config), waves)
        return list(tqdm(results, total=len(waves), desc="CFP", disable=not progress))


def save_cfp(path: Union[str, Path], cfp: CfpTensor) -> Path:
    """TONETCFP1 magic, dims (3, F, T) as u64 LE, row-major f64 LE values."""
    if cfp.ndim != 3:
        raise ValueError(f"CFP tensor must be 3-D, got shape {cfp.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(CFP_MAGIC)
        f.write(np.array(cfp.shape, dtype="<u8").tobytes())
        f.write(np.ascontiguousarray(cfp, dtype="<f8").tobytes())
    return path


def load_cfp(path: Union[str, Path]) -> CfpTensor:
    blob = Path(path).read_bytes()
    if not blob.startswith(CFP_MAGIC):
        raise ValueError(f"{path} is not a TONETCFP1 file")
    offset = len(CFP_MAGIC)
    dims = tuple(int(d) for d in np.frombuffer(blob, dtype="<u8", count=3, offset=offset))
    offset += 24
    count = int(np.prod(dims))
    if len(blob) - offset != count * 8:
        raise ValueError(f"{path}: expected {count} values for shape {dims}")
    return np.frombuffer(blob, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(dims)
