import numpy as np
import pytest

from tonet.data.synth import SynthSpec, make_corpus
from tonet.dsp.audio import Waveform
from tonet.model.config import model_config_for_preset

TINY_MODEL = {
    "mlp_hidden": 8,
    "conv_channels": [2, 3, 4],
    "d_model": 8,
    "heads": 2,
    "layers": 1,
    "ff_width": 16,
}

# Full 360-bin geometry, small widths; trains in seconds
SMALL_MODEL_CFG = """\
preset=desk
backbone=mlp
mlp_hidden=16
d_model=8
heads=2
layers=1
ff_width=16
"""


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    """72 bins / 12 per octave: the conv pools (4, 3, 6) reduce it to one row."""

    def make(variant="full", backbone="mlp", **overrides):
        values = dict(TINY_MODEL, num_bins=72, bins_per_octave=12, variant=variant, backbone=backbone)
        values.update(overrides)
        return model_config_for_preset("desk", **values)

    return make


@pytest.fixture
def small_config():
    def make(variant="full", **overrides):
        values = dict(mlp_hidden=16, d_model=8, heads=2, layers=1, ff_width=16, variant=variant)
        values.update(overrides)
        return model_config_for_preset("desk", **values)

    return make


@pytest.fixture
def sine():
    def make(freq, seconds=1.28, amplitude=0.5, sample_rate=8000):
        t = np.arange(int(round(seconds * sample_rate))) / sample_rate
        return Waveform(samples=amplitude * np.sin(2.0 * np.pi * freq * t), sample_rate=sample_rate)

    return make


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Two 1.28 s clips with accompaniment."""
    out = tmp_path_factory.mktemp("corpus")
    make_corpus(out, seed=7, n_clips=2, template=SynthSpec(duration=1.28))
    return out


@pytest.fixture
def small_model_file(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_MODEL_CFG)
    return path
