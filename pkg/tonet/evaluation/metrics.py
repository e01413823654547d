"""
Melody Metrics

Frame-level melody scores on a common time grid:
- VR / VFA: voicing recall and false alarm
- RPA / RCA: raw pitch / raw chroma accuracy over reference-voiced frames
- ROA: raw octave accuracy, octave index only
- OA: overall accuracy over all frames

The estimate's pitch is used on every frame regardless of its voicing
decision. Where the estimate is unvoiced, its pitch is the last voiced
pitch (the first voiced pitch before any voiced frame); a fully unvoiced
estimate has pitch 0, which never counts as correct.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Literal, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..data.labels import PitchContour, hz_to_midi

METRIC_NAMES = ("vr", "vfa", "rpa", "rca", "roa", "oa")
GRID_TOLERANCE = 1e-4


class GridMismatchError(ValueError):
    """Raised when estimate and reference are not on the same time grid."""


@dataclass
class MelodySeries:
    """Pitch defined on every frame, with the voicing decision alongside."""

    times: np.ndarray
    pitch: np.ndarray
    voicing: np.ndarray


@dataclass
class EvalResult:
    vr: float = 0.0
    vfa: float = 0.0
    rpa: float = 0.0
    rca: float = 0.0
    roa: float = 0.0
    oa: float = 0.0
    ref_voiced: int = 0
    ref_unvoiced: int = 0
    total: int = 0
    # Metrics reported as 0.0 because their denominator was empty
    empty: Tuple[str, ...] = field(default_factory=tuple)

    def metrics(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self) -> Dict[str, object]:
        out = asdict(self)
        out["empty"] = ",".join(self.empty)
        return out


def freeze_pitch(freqs: np.ndarray) -> np.ndarray:
    """Carry the last voiced pitch through unvoiced frames."""
    freqs = np.asarray(freqs, dtype=np.float64)
    voiced = np.flatnonzero(freqs > 0)
    if voiced.size == 0:
        return np.zeros_like(freqs)
    # Index of the most recent voiced frame, or the first one before any
    last = np.maximum.accumulate(np.where(freqs > 0, np.arange(len(freqs)), -1))
    last = np.where(last < 0, voiced[0], last)
    return freqs[last]


def to_series(contour: PitchContour) -> MelodySeries:
    return MelodySeries(times=contour.times, pitch=freeze_pitch(contour.freqs), voicing=contour.voiced)


def resample_contour(est: PitchContour, ref_times) -> MelodySeries:
    """Nearest-neighbour resampling onto `ref_times`; exact ties go to the earlier frame."""
    if len(est) == 0:
        raise ValueError("Cannot resample an empty estimate")
    ref_times = np.asarray(ref_times, dtype=np.float64)
    series = to_series(est)
    n = len(est)
    pos = np.searchsorted(est.times, ref_times, side="left")
    right = np.clip(pos, 0, n - 1)
    left = np.clip(pos - 1, 0, n - 1)
    take_left = np.abs(ref_times - est.times[left]) <= np.abs(est.times[right] - ref_times) + 1e-9
    index = np.where(take_left, left, right)
    return MelodySeries(times=ref_times, pitch=series.pitch[index], voicing=series.voicing[index])


def _check_grid(est: MelodySeries, ref: PitchContour):
    if len(est.times) != len(ref.times):
        raise GridMismatchError(f"Estimate has {len(est.times)} frames, reference has {len(ref.times)}")
    if len(ref.times) and np.max(np.abs(est.times - ref.times)) > GRID_TOLERANCE:
        raise GridMismatchError("Estimate and reference time stamps differ; resample the estimate first")


def _cents(est_pitch: np.ndarray, ref_pitch: np.ndarray) -> np.ndarray:
    """1200 log2(e / r) where both are positive, NaN elsewhere."""
    valid = (est_pitch > 0) & (ref_pitch > 0)
    out = np.full(est_pitch.shape, np.nan)
    out[valid] = 1200.0 * np.log2(est_pitch[valid] / ref_pitch[valid])
    return out


def fold_cents(cents: np.ndarray) -> np.ndarray:
    """Fold into (-600, 600]."""
    return 600.0 - np.mod(600.0 - cents, 1200.0)


def octave_index(freqs: np.ndarray) -> np.ndarray:
    """floor(round(69 + 12 log2(f / 440)) / 12) - 1."""
    return hz_to_midi(freqs) // 12 - 1


def _octave_hits(est: MelodySeries, ref: PitchContour, mode: str) -> np.ndarray:
    ref_voiced = ref.voiced
    hits = np.zeros(len(ref), dtype=bool)
    valid = ref_voiced & (est.pitch > 0)
    if mode == "quantized":
        hits[valid] = octave_index(est.pitch[valid]) == octave_index(ref.freqs[valid])
    elif mode == "folded":
        cents = _cents(est.pitch, ref.freqs)
        hits[valid] = np.floor(cents[valid] / 1200.0 + 0.5) == 0
    else:
        raise ValueError(f"Unknown ROA mode '{mode}'")
    return hits


def _as_series(est: Union[PitchContour, MelodySeries]) -> MelodySeries:
    return est if isinstance(est, MelodySeries) else to_series(est)


def roa(
    est: Union[PitchContour, MelodySeries],
    ref: PitchContour,
    mode: Literal["quantized", "folded"] = "quantized",
) -> float:
    """Raw octave accuracy over reference-voiced frames."""
    series = _as_series(est)
    _check_grid(series, ref)
    voiced = int(ref.voiced.sum())
    if voiced == 0:
        return 0.0
    return float(_octave_hits(series, ref, mode).sum() / voiced)


def evaluate_pair(
    est: Union[PitchContour, MelodySeries],
    ref: PitchContour,
    tolerance_cents: float = 50.0,
    roa_mode: Literal["quantized", "folded"] = "quantized",
) -> EvalResult:
    """
    Score an estimate against a reference on the same grid.

    Args:
        est: Estimated contour (or a series from resample_contour)
        ref: Reference contour
        tolerance_cents: Pitch tolerance for RPA / RCA / OA

    Returns:
        EvalResult; empty denominators give 0.0 and are listed in `empty`
    """
    series = _as_series(est)
    _check_grid(series, ref)

    ref_voiced = ref.voiced
    est_voiced = np.asarray(series.voicing, dtype=bool)
    n_voiced = int(ref_voiced.sum())
    n_unvoiced = int((~ref_voiced).sum())
    total = len(ref)

    cents = _cents(series.pitch, ref.freqs)
    has_pitch = ref_voiced & ~np.isnan(cents)
    pitch_hit = np.zeros(total, dtype=bool)
    chroma_hit = np.zeros(total, dtype=bool)
    pitch_hit[has_pitch] = np.abs(cents[has_pitch]) <= tolerance_cents
    chroma_hit[has_pitch] = np.abs(fold_cents(cents[has_pitch])) <= tolerance_cents
    octave_hit = _octave_hits(series, ref, roa_mode)

    empty = []

    def ratio(count: int, denominator: int, names: Sequence[str]) -> float:
        if denominator == 0:
            empty.extend(n for n in names if n not in empty)
            return 0.0
        return float(count / denominator)

    result = EvalResult(
        vr=ratio(int((est_voiced & ref_voiced).sum()), n_voiced, ["vr"]),
        vfa=ratio(int((est_voiced & ~ref_voiced).sum()), n_unvoiced, ["vfa"]),
        rpa=ratio(int(pitch_hit.sum()), n_voiced, ["rpa"]),
        rca=ratio(int(chroma_hit.sum()), n_voiced, ["rca"]),
        roa=ratio(int(octave_hit.sum()), n_voiced, ["roa"]),
        oa=ratio(int((pitch_hit & est_voiced).sum() + (~ref_voiced & ~est_voiced).sum()), total, ["oa"]),
        ref_voiced=n_voiced,
        ref_unvoiced=n_unvoiced,
        total=total,
    )
    result.empty = tuple(empty)
    return result


def evaluate_contours(est: PitchContour, ref: PitchContour, tolerance_cents: float = 50.0) -> EvalResult:
    """Resample `est` onto the reference grid, then score."""
    return evaluate_pair(resample_contour(est, ref.times), ref, tolerance_cents)


def average_results(results: Sequence[EvalResult]) -> EvalResult:
    """Per-clip mean of each metric; frame counts are summed."""
    if not results:
        raise ValueError("No results to average")
    means = {name: float(np.mean([getattr(r, name) for r in results])) for name in METRIC_NAMES}
    empty = tuple(sorted({n for r in results for n in r.empty}))
    return EvalResult(
        **means,
        ref_voiced=sum(r.ref_voiced for r in results),
        ref_unvoiced=sum(r.ref_unvoiced for r in results),
        total=sum(r.total for r in results),
        empty=empty,
    )


def results_frame(results: Mapping[str, EvalResult]) -> pd.DataFrame:
    """One row per labelled result, metric columns in fixed order."""
    rows = [dict(name=name, **r.metrics()) for name, r in results.items()]
    return pd.DataFrame(rows, columns=["name", *METRIC_NAMES])


def format_table(result: EvalResult) -> str:
    """Fixed-order `VR VFA RPA RCA ROA OA` table."""
    frame = pd.DataFrame([result.metrics()], columns=list(METRIC_NAMES))
    frame.columns = [c.upper() for c in frame.columns]
    return frame.to_string(index=False, float_format=lambda v: f"{v:.4f}")
