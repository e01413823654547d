import struct

import numpy as np
import pytest

from tonet.core.checkpoint import (
    CHECKPOINT_MAGIC,
    CheckpointError,
    decode_arrays,
    encode_arrays,
    load_checkpoint,
    save_checkpoint,
)
from tonet.model.params import load_params, save_params
from tonet.model.tonet import forward, init_params


def test_byte_layout():
    blob = encode_arrays({"w": np.array([1.0, 2.0])})
    expected = (
        b"TONETCKPT1"
        + struct.pack("<Q", 1)
        + b"w"
        + struct.pack("<Q", 1)
        + struct.pack("<Q", 2)
        + struct.pack("<2d", 1.0, 2.0)
    )
    assert blob == expected


def test_round_trip_keeps_order_and_values(tmp_path, rng):
    arrays = {
        "zeta": rng.standard_normal((2, 3)),
        "alpha": rng.standard_normal(4),
        "scalar": np.array(1.5),
    }
    path = save_checkpoint(tmp_path / "model.ckpt", arrays)
    loaded = load_checkpoint(path)
    assert list(loaded) == ["zeta", "alpha", "scalar"]
    for name, value in arrays.items():
        np.testing.assert_array_equal(loaded[name], value)
    assert not (tmp_path / "model.ckpt.tmp").exists()


def test_bad_magic():
    with pytest.raises(CheckpointError, match="magic"):
        decode_arrays(b"NOTACKPT" + bytes(16))


def test_truncated():
    blob = encode_arrays({"w": np.arange(6.0).reshape(2, 3)})
    with pytest.raises(CheckpointError, match="Truncated"):
        decode_arrays(blob[:-5])


def test_magic_only_is_empty():
    assert decode_arrays(CHECKPOINT_MAGIC) == {}


@pytest.mark.parametrize("backbone", ["mlp", "conv-encdec"])
def test_params_reload_reproduces_outputs(tmp_path, rng, tiny_config, backbone):
    config = tiny_config(backbone=backbone)
    params = init_params(config)
    cfp = rng.random((2, 3, 72, 8))
    tcfp = rng.random((2, 3, 72, 8))

    path = save_params(tmp_path / "best.ckpt", params)
    template = init_params(config.model_copy(update={"seed": 99}))
    restored = load_params(path, template)

    before = forward(params, config, cfp, tcfp)
    after = forward(restored, config, cfp, tcfp)
    np.testing.assert_array_equal(before.final.values, after.final.values)
    np.testing.assert_array_equal(before.tone.values, after.tone.values)
    np.testing.assert_array_equal(before.octave.values, after.octave.values)


def test_record_order_is_group_order(tiny_config):
    names = list(init_params(tiny_config(backbone="conv-encdec")).state_dict())
    groups = [n.replace("buffer:", "").split(".")[0] for n in names]
    order = ["encoder_cfp", "encoder_tcfp", "tone_decoder", "octave_decoder", "fusion"]
    assert groups == sorted(groups, key=order.index)
    assert any(n.startswith("buffer:") for n in names)


def test_variant_mismatch(tmp_path, tiny_config):
    path = save_params(tmp_path / "base.ckpt", init_params(tiny_config(variant="base")))
    with pytest.raises(CheckpointError, match="does not match"):
        load_params(path, init_params(tiny_config(variant="full")))


def test_shape_mismatch(tmp_path, tiny_config):
    path = save_params(tmp_path / "wide.ckpt", init_params(tiny_config(mlp_hidden=12)))
    with pytest.raises(CheckpointError, match="shape"):
        load_params(path, init_params(tiny_config()))
