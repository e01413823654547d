import numpy as np
import pytest

from tonet.data.labels import (
    LabelError,
    LabelMaps,
    PitchContour,
    bin_to_hz,
    contour_to_label_maps,
    hz_to_bin,
    hz_to_tone_octave,
    hz_to_tone_octaves,
    read_contour_csv,
    salience_to_contour,
    write_contour_csv,
)


def _random_contour(rng, frames=200, voiced_fraction=0.7):
    freqs = np.exp(rng.uniform(np.log(34.0), np.log(1900.0), size=frames))
    freqs[rng.random(frames) > voiced_fraction] = 0.0
    return PitchContour.on_grid(freqs)


# ===== Bins and labels =====


@pytest.mark.parametrize(
    "freq,expected",
    [(32.5, 0), (65.0, 60), (440.0, 226), (0.0, -1), (20.0, 0), (5000.0, 359)],
)
def test_hz_to_bin(freq, expected):
    assert hz_to_bin(freq) == expected


def test_negative_frequency():
    with pytest.raises(LabelError, match="Negative"):
        hz_to_bin(-1.0)


@pytest.mark.parametrize(
    "freq,expected",
    [(440.0, (9, 3)), (0.0, (12, 6)), (32.70, (0, 0)), (261.63, (0, 3)), (1975.5, (11, 5)), (466.16, (10, 3))],
)
def test_hz_to_tone_octave(freq, expected):
    assert hz_to_tone_octave(freq) == expected


@pytest.mark.parametrize("freq", [30.87, 2093.0])
def test_tone_octave_outside_range(freq):
    with pytest.raises(LabelError, match="outside C1-B6"):
        hz_to_tone_octave(freq)


# ===== Label maps =====


class TestLabelMaps:
    def test_unvoiced(self):
        maps = contour_to_label_maps(PitchContour.on_grid(np.zeros(5)), 5)
        assert maps.final[0].tolist() == [1.0] * 5
        assert maps.final[1:].sum() == 0
        assert maps.tone[12].tolist() == [1.0] * 5
        assert maps.octave[6].tolist() == [1.0] * 5

    def test_constant_440(self):
        maps = contour_to_label_maps(PitchContour.on_grid(np.full(4, 440.0)), 4)
        assert maps.final[227].tolist() == [1.0] * 4
        assert maps.tone[9].tolist() == [1.0] * 4
        assert maps.octave[3].tolist() == [1.0] * 4

    def test_alternating(self):
        maps = contour_to_label_maps(PitchContour.on_grid([440.0, 0.0, 440.0, 0.0]), 4)
        assert maps.final[227].tolist() == [1.0, 0.0, 1.0, 0.0]
        assert maps.final[0].tolist() == [0.0, 1.0, 0.0, 1.0]
        assert maps.tone[12].tolist() == [0.0, 1.0, 0.0, 1.0]
        assert maps.octave[6].tolist() == [0.0, 1.0, 0.0, 1.0]

    def test_columns_sum_to_one(self, rng):
        for _ in range(10):
            maps = contour_to_label_maps(_random_contour(rng), 200)
            for target in (maps.final, maps.tone, maps.octave):
                np.testing.assert_array_equal(target.sum(axis=0), np.ones(200))
            unvoiced = maps.final[0] == 1
            np.testing.assert_array_equal(maps.tone[12] == 1, unvoiced)
            np.testing.assert_array_equal(maps.octave[6] == 1, unvoiced)

    def test_uses_leading_frames(self):
        maps = contour_to_label_maps(PitchContour.on_grid([440.0, 440.0, 0.0]), 2)
        assert maps.num_frames == 2

    def test_too_few_frames(self):
        with pytest.raises(LabelError, match="3 frames, 5 required"):
            contour_to_label_maps(PitchContour.on_grid(np.zeros(3)), 5)

    def test_misaligned_grid(self):
        contour = PitchContour(times=[0.0, 0.02, 0.04], freqs=[440.0, 440.0, 440.0])
        with pytest.raises(LabelError, match="10 ms grid"):
            contour_to_label_maps(contour, 3)

    def test_grid_tolerance(self):
        contour = PitchContour(times=[0.0, 0.01005, 0.02], freqs=[440.0, 440.0, 440.0])
        assert contour_to_label_maps(contour, 3).num_frames == 3

    def test_stack(self):
        maps = [contour_to_label_maps(PitchContour.on_grid(np.zeros(8)), 8) for _ in range(3)]
        final, tone, octave = LabelMaps.stack(maps)
        assert final.shape == (3, 361, 8)
        assert tone.shape == (3, 13, 8)
        assert octave.shape == (3, 7, 8)


# ===== Decoding =====


class TestDecoding:
    def test_uniform_map_is_unvoiced(self):
        contour = salience_to_contour(np.full((361, 6), 0.5))
        assert not contour.freqs.any()
        np.testing.assert_allclose(contour.times, np.arange(6) * 0.01)

    def test_row_227(self):
        salience = np.full((361, 3), 0.1)
        salience[227] = 0.9
        contour = salience_to_contour(salience)
        np.testing.assert_allclose(contour.freqs, 32.5 * 2 ** (226 / 60))

    def test_round_trip_within_ten_cents(self, rng):
        for _ in range(10):
            contour = _random_contour(rng)
            decoded = salience_to_contour(contour_to_label_maps(contour, len(contour)).final)
            voiced = contour.voiced
            np.testing.assert_array_equal(decoded.voiced, voiced)
            cents = 1200 * np.log2(decoded.freqs[voiced] / contour.freqs[voiced])
            assert np.max(np.abs(cents)) <= 10.0 + 1e-9
            np.testing.assert_allclose(decoded.freqs[voiced], bin_to_hz(np.round(60 * np.log2(contour.freqs[voiced] / 32.5))))

    def test_tone_octave_consistency(self, rng):
        # decoded bin centres can sit up to 10 cents off, so keep 11 cents from semitone edges
        checked = 0
        for _ in range(10):
            contour = _random_contour(rng)
            maps = contour_to_label_maps(contour, len(contour))
            decoded = salience_to_contour(maps.final)
            semitones = 69 + 12 * np.log2(np.where(contour.voiced, contour.freqs, 440.0) / 440.0)
            edge_cents = np.abs((semitones - np.floor(semitones)) - 0.5) * 100
            frames = np.flatnonzero(contour.voiced & (edge_cents >= 11.0))
            tones, octaves = hz_to_tone_octaves(decoded.freqs[frames])
            np.testing.assert_array_equal(tones, maps.tone[:, frames].argmax(axis=0))
            np.testing.assert_array_equal(octaves, maps.octave[:, frames].argmax(axis=0))
            checked += len(frames)
        assert checked > 500


# ===== CSV =====


def test_contour_csv_format(tmp_path):
    path = write_contour_csv(tmp_path / "est.csv", PitchContour.on_grid([440.0, 0.0]))
    assert path.read_text() == "0.000000,440.000000\n0.010000,0.000000\n"
    loaded = read_contour_csv(path)
    np.testing.assert_allclose(loaded.freqs, [440.0, 0.0])


@pytest.mark.parametrize("times", [[0.0, 0.02, 0.01], [0.0, 0.01, 0.01], [0.0, np.nan, 0.02]])
def test_contour_times_must_increase(times):
    with pytest.raises(LabelError, match="strictly increasing"):
        PitchContour(times=times, freqs=[440.0, 440.0, 440.0])


def test_empty_and_single_frame_contours():
    assert len(PitchContour(times=[], freqs=[])) == 0
    assert len(PitchContour(times=[0.5], freqs=[220.0])) == 1


def test_contour_csv_rejects_reversed_times(tmp_path):
    path = tmp_path / "reversed.csv"
    path.write_text("0.010000,440.000000\n0.000000,440.000000\n")
    with pytest.raises(LabelError, match="row 1"):
        read_contour_csv(path)


def test_contour_csv_rejects_negative(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.0,440.0\n0.01,-5.0\n")
    with pytest.raises(LabelError):
        read_contour_csv(path)
