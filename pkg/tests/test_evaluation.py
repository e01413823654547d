import math

import numpy as np
import pytest

from tonet.data.labels import PitchContour
from tonet.evaluation.metrics import (
    METRIC_NAMES,
    EvalResult,
    GridMismatchError,
    average_results,
    evaluate_contours,
    evaluate_pair,
    fold_cents,
    format_table,
    freeze_pitch,
    octave_index,
    resample_contour,
    results_frame,
    roa,
)


def _const(freq, frames=10):
    return PitchContour.on_grid(np.full(frames, float(freq)))


# ===== Resampling =====


class TestResample:
    def test_same_grid(self):
        est = PitchContour.on_grid([440.0, 450.0, 0.0, 460.0])
        series = resample_contour(est, est.times)
        assert series.pitch.tolist() == [440.0, 450.0, 450.0, 460.0]
        assert series.voicing.tolist() == [True, True, False, True]

    def test_double_rate_duplicates_frames(self):
        est = PitchContour.on_grid([100.0, 200.0, 300.0])
        series = resample_contour(est, np.arange(6) * 0.005)
        assert series.pitch.tolist() == [100.0, 100.0, 200.0, 200.0, 300.0, 300.0]

    def test_frozen_pitch(self):
        series = resample_contour(PitchContour.on_grid([440.0, 0.0, 0.0, 442.0]), np.arange(4) * 0.01)
        assert series.pitch.tolist() == [440.0, 440.0, 440.0, 442.0]
        assert series.voicing.astype(int).tolist() == [1, 0, 0, 1]

    def test_leading_unvoiced_uses_first_voiced(self):
        assert freeze_pitch(np.array([0.0, 0.0, 300.0, 0.0])).tolist() == [300.0, 300.0, 300.0, 300.0]

    def test_fully_unvoiced(self):
        assert freeze_pitch(np.zeros(3)).tolist() == [0.0, 0.0, 0.0]

    def test_empty_estimate(self):
        with pytest.raises(ValueError, match="empty"):
            resample_contour(PitchContour.on_grid([]), np.arange(3) * 0.01)


# ===== Metric definitions =====


class TestMetrics:
    def test_identical_voiced(self):
        result = evaluate_pair(_const(440.0), _const(440.0))
        assert (result.vr, result.rpa, result.rca, result.roa, result.oa) == (1.0, 1.0, 1.0, 1.0, 1.0)
        assert result.vfa == 0.0
        assert result.empty == ("vfa",)

    def test_small_deviation(self):
        assert evaluate_pair(_const(445.0), _const(440.0)).rpa == 1.0

    def test_octave_error(self):
        result = evaluate_pair(_const(220.0), _const(440.0))
        assert result.rpa == 0.0
        assert result.rca == 1.0
        assert result.roa == 0.0

    def test_same_octave_wrong_tone(self):
        assert roa(_const(261.63), _const(440.0)) == 1.0

    def test_semitone_error(self):
        result = evaluate_pair(_const(466.16), _const(440.0))
        assert (result.roa, result.rpa, result.rca) == (1.0, 0.0, 0.0)

    def test_voicing(self):
        ref = PitchContour.on_grid([440.0, 440.0, 0.0, 0.0])
        est = PitchContour.on_grid([440.0, 0.0, 440.0, 0.0])
        result = evaluate_pair(est, ref)
        assert result.vr == 0.5
        assert result.vfa == 0.5
        assert result.rpa == 1.0
        assert result.oa == 0.5
        assert (result.ref_voiced, result.ref_unvoiced, result.total) == (2, 2, 4)

    def test_unvoiced_estimate_pitch_still_counts(self):
        ref = PitchContour.on_grid([440.0, 440.0])
        est = PitchContour.on_grid([440.0, 0.0])
        result = evaluate_pair(est, ref)
        assert result.rpa == 1.0
        assert result.oa == 0.5

    def test_fully_unvoiced_estimate(self):
        result = evaluate_pair(_const(0.0), _const(440.0))
        assert (result.rpa, result.rca, result.roa, result.oa) == (0.0, 0.0, 0.0, 0.0)

    def test_tolerance_flag(self):
        assert evaluate_pair(_const(460.0), _const(440.0)).rpa == 0.0
        assert evaluate_pair(_const(460.0), _const(440.0), tolerance_cents=80.0).rpa == 1.0

    def test_rca_never_below_rpa(self, rng):
        for _ in range(50):
            ref = PitchContour.on_grid(rng.uniform(60, 1000, 40) * (rng.random(40) < 0.8))
            est = PitchContour.on_grid(ref.freqs * 2.0 ** rng.normal(0, 0.6, 40))
            result = evaluate_pair(est, ref)
            assert result.rca >= result.rpa

    def test_octave_shift(self, rng):
        ref = PitchContour.on_grid(rng.uniform(60, 900, 200))
        est = PitchContour.on_grid(ref.freqs * 2.0)
        shifted = evaluate_pair(est, ref)
        assert shifted.rca == evaluate_pair(ref, ref).rca == 1.0
        assert shifted.rpa == 0.0
        assert shifted.roa == 0.0

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError, match="frames"):
            evaluate_pair(_const(440.0, 5), _const(440.0, 6))
        shifted = PitchContour(times=np.arange(5) * 0.01 + 0.005, freqs=np.full(5, 440.0))
        with pytest.raises(GridMismatchError, match="time stamps"):
            evaluate_pair(shifted, _const(440.0, 5))

    def test_evaluate_contours_resamples(self):
        est = PitchContour(times=np.arange(20) * 0.005, freqs=np.full(20, 440.0))
        assert evaluate_contours(est, _const(440.0)).oa == 1.0

    def test_counts_are_consistent(self, rng):
        ref = PitchContour.on_grid(rng.uniform(60, 1000, 37) * (rng.random(37) < 0.6))
        est = PitchContour.on_grid(rng.uniform(60, 1000, 37) * (rng.random(37) < 0.6))
        result = evaluate_pair(est, ref)
        for name in METRIC_NAMES:
            assert 0.0 <= getattr(result, name) <= 1.0
        assert result.vr * result.ref_voiced == pytest.approx(round(result.vr * result.ref_voiced))
        assert result.vfa * result.ref_unvoiced == pytest.approx(round(result.vfa * result.ref_unvoiced))


# ===== ROA modes =====


def test_fold_cents():
    np.testing.assert_allclose(fold_cents(np.array([-1200.0, 600.0, -600.0, 700.0])), [0.0, 600.0, 600.0, -500.0])


def test_octave_index():
    assert octave_index(np.array([440.0, 261.63, 246.94, 32.70])).tolist() == [4, 4, 3, 1]


def test_roa_modes_differ_near_octave_edges():
    est, ref = _const(261.63), _const(440.0)
    assert roa(est, ref, mode="quantized") == 1.0
    assert roa(est, ref, mode="folded") == 0.0
    assert roa(_const(445.0), ref, mode="folded") == 1.0
    with pytest.raises(ValueError, match="ROA mode"):
        roa(est, ref, mode="nearest")


def test_roa_ignores_unvoiced_reference():
    ref = PitchContour.on_grid([440.0, 0.0, 0.0])
    est = PitchContour.on_grid([440.0, 110.0, 110.0])
    assert roa(est, ref) == 1.0


# ===== Brute-force comparison =====


def _octave_of(f):
    return math.floor(math.floor(69 + 12 * np.log2(f / 440.0) + 0.5) / 12) - 1


def _oracle(est_freqs, ref_freqs, tolerance=50.0):
    n = len(ref_freqs)
    est_pitch = []
    last = next((f for f in est_freqs if f > 0), 0.0)
    for f in est_freqs:
        if f > 0:
            last = f
        est_pitch.append(last)

    voiced = unvoiced = vr = vfa = rpa = rca = roa_hits = oa = 0
    for e_f, e_p, r in zip(est_freqs, est_pitch, ref_freqs):
        e_voiced = e_f > 0
        if r > 0:
            voiced += 1
            vr += e_voiced
            if e_p > 0:
                cents = 1200 * np.log2(e_p / r)
                folded = cents
                while folded > 600:
                    folded -= 1200
                while folded <= -600:
                    folded += 1200
                pitch_ok = abs(cents) <= tolerance
                rpa += pitch_ok
                rca += abs(folded) <= tolerance
                roa_hits += _octave_of(e_p) == _octave_of(r)
                oa += pitch_ok and e_voiced
        else:
            unvoiced += 1
            vfa += e_voiced
            oa += not e_voiced

    def ratio(a, b):
        return a / b if b else 0.0

    return {
        "vr": ratio(vr, voiced),
        "vfa": ratio(vfa, unvoiced),
        "rpa": ratio(rpa, voiced),
        "rca": ratio(rca, voiced),
        "roa": ratio(roa_hits, voiced),
        "oa": ratio(oa, n),
    }


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(1, 80))
        ref = np.exp(rng.uniform(np.log(40.0), np.log(1500.0), n)) * (rng.random(n) < rng.uniform(0.3, 1.0))
        # estimates near the reference, octave slips, semitone slips and noise
        shift = rng.choice([0.0, 0.0, 1.0, -1.0, 1 / 12, 0.5], size=n) + rng.normal(0, 0.03, n)
        base = np.where(ref > 0, ref, rng.uniform(60, 900, n))
        est = base * 2.0 ** shift * (rng.random(n) < rng.uniform(0.3, 1.0))
        result = evaluate_pair(PitchContour.on_grid(est), PitchContour.on_grid(ref))
        assert result.metrics() == _oracle(est, ref)


# ===== Aggregation and tables =====


def test_average_results():
    a = evaluate_pair(_const(440.0), _const(440.0))
    b = evaluate_pair(_const(220.0), _const(440.0))
    mean = average_results([a, b])
    assert mean.rpa == 0.5
    assert mean.rca == 1.0
    assert mean.total == 20
    assert mean.empty == ("vfa",)
    with pytest.raises(ValueError):
        average_results([])


def test_format_table():
    lines = format_table(evaluate_pair(_const(440.0), _const(440.0))).splitlines()
    assert lines[0].split() == ["VR", "VFA", "RPA", "RCA", "ROA", "OA"]
    assert lines[1].split() == ["1.0000", "0.0000", "1.0000", "1.0000", "1.0000", "1.0000"]


def test_results_frame():
    frame = results_frame({"clip_0000": EvalResult(rpa=0.5), "clip_0001": EvalResult(oa=1.0)})
    assert frame.columns.tolist() == ["name", *METRIC_NAMES]
    assert frame["rpa"].tolist() == [0.5, 0.0]


def test_to_dict():
    row = evaluate_pair(_const(440.0), _const(440.0)).to_dict()
    assert row["empty"] == "vfa"
    assert row["total"] == 10
