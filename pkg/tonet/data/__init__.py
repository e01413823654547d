"""TONet Labels and Corpora"""

from .labels import (
    LabelError,
    LabelMaps,
    PitchContour,
    bin_to_hz,
    contour_to_label_maps,
    hz_to_bin,
    hz_to_tone_octave,
    read_contour_csv,
    salience_to_contour,
    write_contour_csv,
)
from .synth import NoteEvent, SynthSpec, make_corpus, synth_clip
from .corpus import Clip, read_corpus

__all__ = [
    "LabelError",
    "LabelMaps",
    "PitchContour",
    "bin_to_hz",
    "contour_to_label_maps",
    "hz_to_bin",
    "hz_to_tone_octave",
    "read_contour_csv",
    "salience_to_contour",
    "write_contour_csv",
    "NoteEvent",
    "SynthSpec",
    "make_corpus",
    "synth_clip",
    "Clip",
    "read_corpus",
]
