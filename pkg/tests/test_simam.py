import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simam_core.attention import (
    DEFAULT_LAMBDA,
    EnergyParams,
    SimAM,
    channel_stats,
    simam_energy,
    simam_refine,
)
from simam_core.errors import NonFiniteError, ShapeError, SimamError
from simam_core.tensor import Tensor
from simam_core.tensor import functional as F
from simam_core.verification import check_function, reference_attention_weights

values = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
lambdas = st.sampled_from([1e-4, 7e-4, 0.7, 5.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(-100, 100, allow_nan=False), lambdas)
def test_constant_channel_law(c, lam):
    x = np.full((1, 2, 3, 3), c)
    params = EnergyParams(lam=lam)
    assert np.max(np.abs(simam_energy(x, params).e_star.data - 2.0)) < 1e-12
    expected = x / (1.0 + math.exp(-0.5))
    assert np.max(np.abs(simam_refine(x, params).data - expected)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (1, 2, 4, 4), elements=values), values)
def test_shift_invariance(x, c):
    base = simam_energy(x).weights.data
    shifted = simam_energy(x + c).weights.data
    assert np.max(np.abs(base - shifted)) < 1e-9


def test_per_channel_shift_invariance(rng):
    x = rng.normal(size=(2, 3, 5, 5))
    base = simam_energy(x).weights.data
    shifted = simam_energy(x + rng.normal(size=(2, 3, 1, 1))).weights.data
    assert np.max(np.abs(base - shifted)) < 1e-12


def test_scale_invariance_without_regularizer(rng):
    x = rng.normal(size=(1, 2, 4, 4))
    weights = reference_attention_weights(x, 0.0)
    assert np.max(np.abs(weights - reference_attention_weights(7.0 * x, 0.0))) < 1e-9


def test_matches_loop_reference(rng):
    x = rng.normal(size=(2, 3, 4, 5))
    reference = reference_attention_weights(x, DEFAULT_LAMBDA)
    assert np.max(np.abs(simam_energy(x).weights.data - reference)) < 1e-12
    assert np.allclose(simam_refine(x).data, x * reference)


def test_outlier_gets_the_largest_weight():
    x = np.zeros((1, 1, 3, 3))
    x[0, 0, 1, 1] = 4.0
    map_ = simam_energy(x)
    assert np.argmax(map_.importance.ravel()) == 4
    assert np.argmax(map_.weights.data.ravel()) == 4


def test_energy_is_at_most_two(rng):
    e = simam_energy(rng.normal(size=(2, 2, 6, 6))).e_star.data
    assert np.all(e <= 2.0 + 1e-12)
    assert np.all(e > 0)


def test_weights_are_in_gate_range(rng):
    w = simam_energy(rng.normal(size=(2, 2, 6, 6)) * 10).weights.data
    assert np.all(w >= 1.0 / (1.0 + math.exp(-0.5)) - 1e-12)
    assert np.all(w < 1.0)


def test_channel_stats_are_biased_moments():
    x = np.arange(8, dtype=np.float64).reshape(1, 2, 2, 2)
    stats = channel_stats(Tensor(x))
    assert np.allclose(stats.alpha_hat, [[1.5, 5.5]])
    assert np.allclose(stats.beta_hat_sq, [[1.25, 1.25]])


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_nonpositive_lambda_is_rejected(lam):
    with pytest.raises(ValueError):
        simam_refine(np.ones((1, 1, 2, 2)), EnergyParams(lam=lam))


def test_energy_labels_are_fixed():
    with pytest.raises(ValueError):
        EnergyParams(label_pos=2)


def test_rejects_non_4d_and_non_finite():
    with pytest.raises(ShapeError):
        simam_refine(np.ones((2, 2, 2)))
    x = np.ones((1, 1, 2, 2))
    x[0, 0, 0, 0] = np.nan
    with pytest.raises(NonFiniteError) as info:
        simam_refine(x)
    assert isinstance(info.value, SimamError)
    assert isinstance(info.value, ValueError)


def test_single_position_channel():
    out = simam_refine(np.full((1, 2, 1, 1), 3.0)).data
    assert np.allclose(out, 3.0 / (1.0 + math.exp(-0.5)))


@pytest.mark.parametrize("lam", [1e-4, 7e-4, 0.7])
def test_refine_gradient(rng, lam):
    params = EnergyParams(lam=lam)
    weights = rng.normal(size=(2, 3, 4, 4))
    check = check_function(
        "simam",
        lambda x: F.sum(F.mul(simam_refine(x, params), Tensor(weights))),
        [rng.normal(size=(2, 3, 4, 4))],
    )
    assert check.passed, check


def test_layer_has_no_parameters(rng):
    layer = SimAM(lam=7e-4)
    assert layer.parameters() == []
    assert layer.num_parameters() == 0
    x = rng.normal(size=(1, 4, 3, 3))
    assert layer(x).shape == x.shape


def test_float32_input_keeps_dtype(rng):
    x = Tensor(rng.normal(size=(1, 2, 3, 3)), dtype="float32")
    assert simam_refine(x).dtype == np.float32
