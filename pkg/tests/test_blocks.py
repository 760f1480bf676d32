import dataclasses

import numpy as np
import pytest

from simam_core.errors import ConfigError, ShapeError
from simam_core.nn import MBConv, MBConvSpec, mbconv_param_count
from simam_core.verification import check_module

SPECS = [
    MBConvSpec(48, 24, expansion=1, kernel=3),
    MBConvSpec(24, 32, expansion=6, kernel=3, stride=2),
    MBConvSpec(32, 56, expansion=6, kernel=5, stride=2),
    MBConvSpec(56, 56, expansion=6, kernel=5),
    MBConvSpec(8, 8, expansion=1, kernel=5),
]


def test_stage_two_block_count():
    assert mbconv_param_count(MBConvSpec(48, 24, expansion=1, kernel=3)) == 2880


@pytest.mark.parametrize("spec", SPECS)
def test_count_matches_enumeration(spec):
    assert mbconv_param_count(spec) == MBConv(spec).num_parameters()


@pytest.mark.parametrize("spec", SPECS)
def test_simam_is_parameter_free(spec):
    with_simam = dataclasses.replace(spec, simam_after_dw=True)
    assert mbconv_param_count(with_simam) == mbconv_param_count(spec)
    assert MBConv(with_simam).num_parameters() == MBConv(spec).num_parameters()


def test_expanded_width_at_stage_four():
    spec = MBConvSpec(32, 56, expansion=6, kernel=5, stride=2, simam_after_dw=True)
    block = MBConv(spec)
    assert spec.expanded_channels == 192
    assert block.depthwise_output_shape((1, 32, 56, 56)) == (1, 192, 28, 28)


@pytest.mark.parametrize(
    "spec,skip",
    [
        (MBConvSpec(8, 8), True),
        (MBConvSpec(8, 8, stride=2), False),
        (MBConvSpec(8, 16), False),
    ],
)
def test_skip_rule(spec, skip):
    assert spec.has_skip is skip


def test_zero_projection_leaves_only_the_skip(rng):
    block = MBConv(MBConvSpec(8, 8, simam_after_dw=True), rng=rng).eval()
    block.project.weight.data = np.zeros_like(block.project.weight.data)
    x = rng.normal(size=(2, 8, 5, 5))
    assert np.array_equal(block(x).data, x)


@pytest.mark.parametrize("simam", [False, True])
def test_shapes(rng, simam):
    block = MBConv(MBConvSpec(8, 16, kernel=5, stride=2, simam_after_dw=simam), rng=rng)
    out = block(rng.normal(size=(2, 8, 6, 6)))
    assert out.shape == (2, 16, 3, 3)
    shape, _ = block.cost((2, 8, 6, 6))
    assert shape == (2, 16, 3, 3)


def test_simam_sees_depthwise_output(rng):
    block = MBConv(MBConvSpec(4, 4, simam_after_dw=True), rng=rng)
    assert block.simam is not None
    _, counts = block.cost((1, 4, 5, 5))
    assert counts["simam"] == 8 * 24 * 5 * 5


def test_eval_forward_is_deterministic(rng):
    block = MBConv(MBConvSpec(8, 8, simam_after_dw=True), rng=rng).eval()
    x = rng.normal(size=(2, 8, 5, 5))
    assert np.array_equal(block(x).data, block(x).data)


def test_channel_mismatch(rng):
    block = MBConv(MBConvSpec(8, 8))
    with pytest.raises(ShapeError):
        block(rng.normal(size=(1, 4, 5, 5)))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(expansion=3),
        dict(kernel=7),
        dict(stride=3),
        dict(se_ratio=0.0),
        dict(in_channels=0),
    ],
)
def test_invalid_specs(kwargs):
    base = dict(in_channels=8, out_channels=8)
    with pytest.raises(ConfigError):
        MBConvSpec(**{**base, **kwargs})


def test_mbconv_gradient_with_simam(rng):
    block = MBConv(MBConvSpec(4, 4, expansion=6, kernel=3, simam_after_dw=True), rng=rng)
    check = check_module(
        "mbconv",
        block,
        rng.normal(size=(2, 4, 5, 5)),
        lambda out: (out * out).sum(),
    )
    assert check.passed, check
