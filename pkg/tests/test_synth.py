import numpy as np
import pytest
from pydantic import ValidationError
from scipy.signal import resample_poly

from tonet.data.corpus import read_corpus, read_manifest
from tonet.data.synth import NoteEvent, SynthSpec, clip_seeds, draw_events, make_corpus, synth_clip
from tonet.dsp.cfp import compute_cfp
from tonet.evaluation.metrics import evaluate_pair

UPSAMPLE = 4


def _acf_pitch(samples, sample_rate, center, half_window=0.02, fmin=60.0, fmax=1100.0):
    """Unbiased-autocorrelation F0 at one sample position of an upsampled signal."""
    half = int(round(half_window * sample_rate))
    if center - half < 0 or center + half > len(samples):
        return np.nan
    segment = samples[center - half:center + half]
    segment = segment - segment.mean()
    n = len(segment)
    acf = np.correlate(segment, segment, mode="full")[n - 1:] / (n - np.arange(n))
    lo, hi = int(sample_rate / fmax), int(sample_rate / fmin) + 1
    lags = np.arange(lo, hi)
    peaks = lags[(acf[lags] > acf[lags - 1]) & (acf[lags] >= acf[lags + 1])]
    if peaks.size == 0:
        return np.nan
    best = acf[peaks].max()
    k = int(peaks[np.argmax(acf[peaks] >= 0.9 * best)])
    a, b, c = acf[k - 1], acf[k], acf[k + 1]
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    return sample_rate / (k + shift)


def _track(wave, contour):
    upsampled = resample_poly(wave.samples, UPSAMPLE, 1)
    rate = wave.sample_rate * UPSAMPLE
    centers = np.round(contour.times * rate).astype(int)
    return np.array([_acf_pitch(upsampled, rate, c) for c in centers])


def _near_boundary(times, events, margin=0.05):
    edges = np.array([e.start for e in events] + [events[-1].end])
    return np.min(np.abs(times[:, None] - edges[None, :]), axis=1) < margin


# ===== Single clips =====


class TestSynthClip:
    def test_rest_only(self):
        spec = SynthSpec(duration=1.28, events=[NoteEvent(start=0.0, duration=1.28)])
        wave, contour = synth_clip(spec)
        assert len(wave) == 10240
        assert len(contour) == 128
        assert not contour.freqs.any()
        assert np.max(np.abs(wave.samples)) == pytest.approx(0.9)

    @pytest.mark.parametrize("n_harmonics, channels", [(1, (0, 1, 2)), (8, (0, 1))])
    def test_single_note_on_cfp_channels(self, n_harmonics, channels):
        spec = SynthSpec(
            duration=1.28,
            accompaniment=False,
            n_harmonics=n_harmonics,
            events=[NoteEvent(start=0.0, duration=1.28, midi=69)],
        )
        wave, contour = synth_clip(spec)
        np.testing.assert_allclose(contour.freqs, 440.0)
        cfp = compute_cfp(wave)
        for channel in channels:
            peaks = cfp[channel].argmax(axis=0)[10:-10]
            assert np.all(np.abs(peaks - 226) <= 1), f"channel {channel}: {np.unique(peaks)}"

    def test_deterministic(self):
        first = synth_clip(SynthSpec(seed=17))
        second = synth_clip(SynthSpec(seed=17))
        np.testing.assert_array_equal(first[0].samples, second[0].samples)
        np.testing.assert_array_equal(first[1].freqs, second[1].freqs)
        assert not np.array_equal(first[0].samples, synth_clip(SynthSpec(seed=18))[0].samples)

    def test_f0_range(self):
        for seed in range(10):
            _, contour = synth_clip(SynthSpec(seed=seed))
            voiced = contour.freqs[contour.voiced]
            assert voiced.size > 0
            assert voiced.min() >= 65.4
            assert voiced.max() <= 987.8

    def test_events_tile_duration(self):
        for seed in range(10):
            spec = SynthSpec(seed=seed)
            events = draw_events(spec, np.random.default_rng(seed))
            assert events[0].start == 0.0
            assert events[0].midi is None
            for prev, nxt in zip(events, events[1:]):
                assert nxt.start == pytest.approx(prev.end)
            assert events[-1].end == pytest.approx(spec.duration)

    def test_spec_validation(self):
        with pytest.raises(ValidationError, match="f0_range"):
            SynthSpec(f0_range=(500.0, 100.0))
        with pytest.raises(ValidationError):
            SynthSpec(rest_probability=1.5)

    def test_clip_seeds(self):
        seeds = clip_seeds(0, 4)
        assert seeds == clip_seeds(0, 4)
        assert len(set(seeds)) == 4
        assert clip_seeds(0, 5)[:4] == seeds


def test_acf_tracker_agrees_with_ground_truth():
    """A naive autocorrelation tracker recovers the labelled pitch of clean voices."""
    for seed in range(4):
        spec = SynthSpec(seed=seed, accompaniment=False)
        wave, contour = synth_clip(spec)
        events = draw_events(spec, np.random.default_rng(seed))
        tracked = _track(wave, contour)
        keep = contour.voiced & ~_near_boundary(contour.times, events) & np.isfinite(tracked)
        assert keep.sum() > 100
        cents = 1200 * np.log2(tracked[keep] / contour.freqs[keep])
        assert np.mean(np.abs(cents) <= 50) >= 0.98, f"seed {seed}"


# ===== Corpora =====


@pytest.fixture(scope="module")
def corpus8(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus8")
    make_corpus(out, seed=0, n_clips=8)
    return out


class TestCorpus:
    def test_files(self, corpus8):
        names = sorted(p.name for p in corpus8.iterdir())
        assert len(names) == 17
        assert "manifest.txt" in names
        assert "clip_0007.wav" in names and "clip_0007.csv" in names

    def test_manifest(self, corpus8):
        lines = (corpus8 / "manifest.txt").read_text().splitlines()
        assert lines[0] == "# seed=0"
        assert lines[1] == "clip_0000.wav,clip_0000.csv"
        assert len(read_manifest(corpus8 / "manifest.txt")) == 8

    def test_reruns_are_byte_identical(self, corpus8, tmp_path):
        make_corpus(tmp_path, seed=0, n_clips=8)
        for path in corpus8.iterdir():
            assert (tmp_path / path.name).read_bytes() == path.read_bytes(), path.name

    def test_round_trip(self, corpus8):
        clips = read_corpus(corpus8)
        assert [c.clip_id for c in clips] == [f"clip_{i:04d}" for i in range(8)]
        for clip, seed in zip(clips, clip_seeds(0, 8)):
            wave, contour = synth_clip(SynthSpec(seed=seed))
            np.testing.assert_allclose(clip.wave.samples, wave.samples, atol=1.0 / 32768)
            np.testing.assert_allclose(clip.contour.freqs, contour.freqs, atol=1e-6)
            np.testing.assert_allclose(clip.contour.times, contour.times, atol=1e-6)
            assert evaluate_pair(clip.contour, contour).oa == 1.0

    def test_voiced_fraction(self, corpus8):
        clips = read_corpus(corpus8)
        voiced = np.concatenate([c.contour.voiced for c in clips])
        assert 0.6 <= voiced.mean() <= 0.95

    def test_needs_a_clip(self, tmp_path):
        with pytest.raises(ValueError, match="n_clips"):
            make_corpus(tmp_path, seed=0, n_clips=0)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="manifest.txt"):
            read_corpus(tmp_path)
