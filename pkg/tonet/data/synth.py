"""
Synthetic Singing Corpora

Additive-synthesis "voices" with exact F0 ground truth:
- Semitone-quantized notes with sinusoidal vibrato (included in the labels)
- Eight harmonics with 1/k amplitude rolloff, phase-continuous
- Optional accompaniment: a sustained triad pad and pink noise

The 10 ms contour is read at each frame centre, matching the centered STFT
framing of the CFP front end.
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..dsp.audio import Waveform, write_wav
from .labels import PitchContour, write_contour_csv

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"


class NoteEvent(BaseModel):
    """One note (or rest when `midi` is None) on the clip timeline."""

    start: float = Field(ge=0.0)
    duration: float = Field(gt=0.0)
    midi: Optional[int] = None
    vibrato_rate: float = 0.0  # Hz
    vibrato_depth: float = 0.0  # cents

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def frequency(self) -> float:
        return 440.0 * 2.0 ** ((self.midi - 69) / 12.0) if self.midi is not None else 0.0


class SynthSpec(BaseModel):
    """Generation parameters for one clip."""

    seed: int = 0
    duration: float = Field(default=2.56, gt=0.0)
    sample_rate: int = 8000
    hop: int = 80
    f0_range: Tuple[float, float] = (65.4, 987.8)
    note_duration: Tuple[float, float] = (0.2, 1.0)
    rest_probability: float = Field(default=0.1, ge=0.0, le=1.0)
    vibrato_rate: Tuple[float, float] = (4.0, 7.0)
    vibrato_depth: Tuple[float, float] = (0.0, 30.0)
    n_harmonics: int = Field(default=8, ge=1)
    accompaniment: bool = True
    pad_level_db: float = -10.0
    noise_level_db: float = -25.0
    lead_in: float = Field(default=0.2, ge=0.0)
    peak: float = Field(default=0.9, gt=0.0, le=1.0)
    events: Optional[List[NoteEvent]] = None

    @model_validator(mode="after")
    def _check_ranges(self) -> "SynthSpec":
        lo, hi = self.f0_range
        if not 0 < lo < hi:
            raise ValueError(f"f0_range must be increasing and positive, got {self.f0_range}")
        if not 0 < self.note_duration[0] <= self.note_duration[1]:
            raise ValueError(f"note_duration must be increasing and positive, got {self.note_duration}")
        if self.vibrato_depth[0] < 0 or self.vibrato_depth[0] > self.vibrato_depth[1]:
            raise ValueError(f"vibrato_depth must be a nonnegative range, got {self.vibrato_depth}")
        return self

    @property
    def num_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def num_frames(self) -> int:
        return -(-self.num_samples // self.hop)


def _midi_bounds(spec: SynthSpec) -> Tuple[int, int]:
    """Note range whose vibrato excursions stay inside f0_range."""
    margin = spec.vibrato_depth[1] / 100.0
    lo = int(np.ceil(69 + 12 * np.log2(spec.f0_range[0] / 440.0) + margin))
    hi = int(np.floor(69 + 12 * np.log2(spec.f0_range[1] / 440.0) - margin))
    if lo > hi:
        raise ValueError(f"f0_range {spec.f0_range} leaves no notes once vibrato depth is accounted for")
    return lo, hi


def draw_events(spec: SynthSpec, rng: np.random.Generator) -> List[NoteEvent]:
    """Random notes and rests tiling [0, duration)."""
    events: List[NoteEvent] = []
    t = 0.0
    if spec.lead_in > 0:
        lead = min(spec.lead_in, spec.duration)
        events.append(NoteEvent(start=0.0, duration=lead))
        t = lead
    lo, hi = _midi_bounds(spec)
    while t < spec.duration - 1e-9:
        length = min(rng.uniform(*spec.note_duration), spec.duration - t)
        if rng.random() < spec.rest_probability:
            events.append(NoteEvent(start=t, duration=length))
        else:
            events.append(
                NoteEvent(
                    start=t,
                    duration=length,
                    midi=int(rng.integers(lo, hi + 1)),
                    vibrato_rate=float(rng.uniform(*spec.vibrato_rate)),
                    vibrato_depth=float(rng.uniform(*spec.vibrato_depth)),
                )
            )
        t += length
    return events


def f0_track(events: List[NoteEvent], num_samples: int, sample_rate: int) -> np.ndarray:
    """Per-sample F0 in Hz, 0 where no note sounds."""
    t = np.arange(num_samples) / sample_rate
    f0 = np.zeros(num_samples)
    for ev in events:
        if ev.midi is None:
            continue
        inside = (t >= ev.start) & (t < ev.end)
        local = t[inside] - ev.start
        cents = ev.vibrato_depth * np.sin(2.0 * np.pi * ev.vibrato_rate * local)
        f0[inside] = ev.frequency * 2.0 ** (cents / 1200.0)
    return f0


def _voice(f0: np.ndarray, spec: SynthSpec) -> np.ndarray:
    sr = spec.sample_rate
    phase = 2.0 * np.pi * np.cumsum(f0) / sr
    voice = np.zeros_like(f0)
    nyquist = 0.95 * sr / 2.0
    for k in range(1, spec.n_harmonics + 1):
        voice += np.sin(k * phase) / k * (k * f0 < nyquist)

    # 5 ms linear attack/release at every voicing edge
    ramp = max(1, int(0.005 * sr))
    voiced = (f0 > 0).astype(np.float64)
    kernel = np.ones(ramp) / ramp
    envelope = np.minimum(np.convolve(voiced, kernel, mode="same"), voiced)
    return voice * envelope


def _pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    spectrum = np.fft.rfft(rng.standard_normal(n))
    k = np.arange(len(spectrum), dtype=np.float64)
    k[0] = 1.0
    noise = np.fft.irfft(spectrum / np.sqrt(k), n=n)
    return noise / (np.std(noise) + 1e-12)


def _pad(n: int, sample_rate: int, rng: np.random.Generator) -> np.ndarray:
    """Sustained major or minor triad in octave 3 with four partials per tone."""
    root = int(rng.integers(48, 60))
    third = 4 if rng.random() < 0.5 else 3
    t = np.arange(n) / sample_rate
    pad = np.zeros(n)
    for midi in (root, root + third, root + 7):
        f = 440.0 * 2.0 ** ((midi - 69) / 12.0)
        for k in range(1, 5):
            pad += np.sin(2.0 * np.pi * k * f * t + rng.uniform(0, 2 * np.pi)) / k
    return pad / (np.std(pad) + 1e-12)


def synth_clip(spec: SynthSpec) -> Tuple[Waveform, PitchContour]:
    """
    Render one clip and its ground-truth contour.

    Returns:
        (waveform peak-normalized to spec.peak, contour on the 10 ms grid)
    """
    rng = np.random.default_rng(spec.seed)
    events = spec.events if spec.events is not None else draw_events(spec, rng)
    n = spec.num_samples

    f0 = f0_track(events, n, spec.sample_rate)
    mix = _voice(f0, spec)

    if spec.accompaniment:
        voiced = f0 > 0
        reference = np.sqrt(np.mean(mix[voiced] ** 2)) if voiced.any() else np.sqrt(0.5)
        pad = _pad(n, spec.sample_rate, rng)
        noise = _pink_noise(n, rng)
        mix = mix + reference * (10.0 ** (spec.pad_level_db / 20.0) * pad + 10.0 ** (spec.noise_level_db / 20.0) * noise)

    peak = np.max(np.abs(mix)) if n else 0.0
    if peak > 0:
        mix = mix * (spec.peak / peak)

    centers = np.arange(spec.num_frames) * spec.hop
    freqs = f0[np.minimum(centers, n - 1)]
    contour = PitchContour.on_grid(freqs, spec.hop / spec.sample_rate)
    return Waveform(samples=mix, sample_rate=spec.sample_rate), contour


def clip_seeds(seed: int, n_clips: int) -> List[int]:
    """Independent per-clip seeds derived from one corpus seed."""
    children = np.random.SeedSequence(seed).spawn(n_clips)
    return [int(child.generate_state(1)[0]) for child in children]


def make_corpus(
    out_dir: Union[str, Path], seed: int, n_clips: int, template: Optional[SynthSpec] = None
) -> Path:
    """
    Write `clip_####.wav` / `clip_####.csv` pairs plus a manifest.

    Args:
        out_dir: Corpus directory (created if missing)
        seed: Corpus seed; clip seeds are spawned from it
        n_clips: Number of clips (>= 1)
        template: Spec whose seed is replaced per clip

    Returns:
        Path of the manifest file
    """
    if n_clips < 1:
        raise ValueError(f"n_clips must be >= 1, got {n_clips}")
    template = template or SynthSpec()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lines = [f"# seed={seed}"]
    for index, clip_seed in enumerate(clip_seeds(seed, n_clips)):
        wave, contour = synth_clip(template.model_copy(update={"seed": clip_seed}))
        wav_name = f"clip_{index:04d}.wav"
        csv_name = f"clip_{index:04d}.csv"
        write_wav(out_dir / wav_name, wave)
        write_contour_csv(out_dir / csv_name, contour)
        lines.append(f"{wav_name},{csv_name}")

    manifest = out_dir / MANIFEST_NAME
    manifest.write_text("\n".join(lines) + "\n")
    logger.info("Wrote %d clips to %s", n_clips, out_dir)
    return manifest
