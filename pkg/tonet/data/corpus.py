"""Corpus directory reader."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

from ..dsp.audio import Waveform, load_wav
from .labels import PitchContour, read_contour_csv
from .synth import MANIFEST_NAME

logger = logging.getLogger(__name__)


@dataclass
class Clip:
    clip_id: str
    wave: Waveform
    contour: PitchContour


def read_manifest(manifest: Union[str, Path]) -> List[tuple]:
    """(wav_path, csv_path) pairs, resolved against the manifest's directory."""
    manifest = Path(manifest)
    pairs = []
    for number, raw in enumerate(manifest.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ValueError(f"{manifest}:{number}: expected 'wav_path,csv_path', got '{line}'")
        pairs.append((manifest.parent / parts[0], manifest.parent / parts[1]))
    return pairs


def read_corpus(corpus_dir: Union[str, Path]) -> List[Clip]:
    """Load every clip listed in the manifest, sorted by clip id."""
    corpus_dir = Path(corpus_dir)
    manifest = corpus_dir / MANIFEST_NAME
    if not manifest.exists():
        raise FileNotFoundError(f"No {MANIFEST_NAME} in {corpus_dir}")

    clips = [
        Clip(clip_id=wav_path.stem, wave=load_wav(wav_path), contour=read_contour_csv(csv_path))
        for wav_path, csv_path in read_manifest(manifest)
    ]
    clips.sort(key=lambda c: c.clip_id)
    logger.info("Loaded %d clips from %s", len(clips), corpus_dir)
    return clips
