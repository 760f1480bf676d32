# -*- coding: utf-8 -*-
"""
Parameter-free 3-D attention from the closed-form minimal neuron energy.

For a neuron ``n`` of channel statistics (mean ``a``, biased variance ``v``)
the minimal energy is ``e* = 4(v + lam) / ((n - a)^2 + 2v + 2lam)``; the
refined feature map is ``sigmoid(1 / e*) * x``, computed per neuron.
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteError, ShapeError
from ..modules import Module, zero_counts
from ..tensor import Tensor
from ..tensor import functional as F
from ..tensor.autograd import record

DEFAULT_LAMBDA = 7e-4


@dataclass(frozen=True)
class EnergyParams:
    lam: float = DEFAULT_LAMBDA
    label_pos: int = 1
    label_neg: int = -1

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be a finite value >= 0, got {self.lam}")
        if (self.label_pos, self.label_neg) != (1, -1):
            raise ValueError("energy labels are fixed at +1 / -1")


@dataclass
class ChannelStats:
    alpha_hat: np.ndarray
    beta_hat_sq: np.ndarray


@dataclass
class EnergyMap:
    e_star: Tensor
    weights: Tensor

    @property
    def importance(self):
        return 1.0 / self.e_star.data


def _validated(x, params):
    x = F.as_tensor(x)
    if x.ndim != 4:
        raise ShapeError(f"SimAM expects an N x C x H x W tensor, got {x.shape}")
    if params.lam <= 0:
        raise ValueError(
            f"SimAM needs lambda > 0 (got {params.lam}); "
            "lambda = 0 is only available to the verification oracle"
        )
    if not np.all(np.isfinite(x.data)):
        raise NonFiniteError("SimAM input contains non-finite values")
    return x


def channel_stats(x):
    mean, var = F.channel_moments(x.detach())
    return ChannelStats(alpha_hat=mean.data, beta_hat_sq=var.data)


def simam_energy(x, params=EnergyParams()):
    """Per-neuron minimal energy and the attention weights it induces."""
    x = _validated(x, params)
    stats = channel_stats(x)
    lam = params.lam

    data = x.data.astype(np.float64)
    d2 = (data - stats.alpha_hat[:, :, None, None]) ** 2
    v = stats.beta_hat_sq.astype(np.float64)[:, :, None, None]
    e_star = 4.0 * (v + lam) / (d2 + 2.0 * v + 2.0 * lam)
    weights = F._sigmoid(1.0 / e_star)

    return EnergyMap(
        e_star=Tensor(e_star, dtype=x.dtype),
        weights=Tensor(weights, dtype=x.dtype),
    )


def simam_refine(x, params=EnergyParams()):
    """
    ``sigmoid(1 / e*) * x`` as a single differentiable op.

    The gradient includes the dependence of the channel mean and variance on
    every neuron.
    """
    x = _validated(x, params)
    lam = params.lam
    N, C, H, W = x.shape
    M = H * W

    data = x.data.astype(np.float64)
    d = data - data.mean(axis=(2, 3), keepdims=True)
    v = (d * d).mean(axis=(2, 3), keepdims=True)
    s = 4.0 * (v + lam)
    inv_energy = d * d / s + 0.5
    gate = F._sigmoid(inv_energy)
    out = data * gate

    def grad_fn(g):
        g = g.astype(np.float64)
        a = g * data * gate * (1.0 - gate)
        grad_d = a * 2.0 * d / s
        grad_v = (a * (-4.0) * d * d / (s * s)).sum(axis=(2, 3), keepdims=True)
        grad = (
            g * gate
            + grad_d
            - grad_d.mean(axis=(2, 3), keepdims=True)
            + grad_v * 2.0 * d / M
        )
        return (grad.astype(x.dtype),)

    return record("simam", (x,), Tensor(out, dtype=x.dtype), grad_fn)


@dataclass(eq=False)
class SimAM(Module):
    """Attention layer; contributes no trainable parameters."""

    lam: float = DEFAULT_LAMBDA
    params: EnergyParams = field(init=False, repr=False)

    def __post_init__(self):
        self.params = EnergyParams(lam=self.lam)

    def forward(self, x):
        return simam_refine(x, self.params)

    def cost(self, shape):
        counts = zero_counts()
        # moments, energy and gate: a handful of element-ops per neuron
        counts["simam"] = 8 * int(np.prod(shape))
        return shape, counts
