# -*- coding: utf-8 -*-
"""
Mobile inverted bottleneck (MBConv): 1x1 expansion, depthwise conv,
squeeze-and-excitation, linear 1x1 projection and an identity skip when the
block keeps shape. SimAM can be hooked between the depthwise conv and its
batch norm.
"""
from dataclasses import dataclass, field

import numpy as np

from ..attention import DEFAULT_LAMBDA, SELayer, SimAM
from ..errors import ConfigError, ShapeError
from ..modules import Module, zero_counts
from ..settings import DEFAULT_DTYPE
from ..tensor import functional as F
from .layers import Activation, BatchNorm2d, Conv2d


@dataclass(frozen=True)
class MBConvSpec:
    in_channels: int
    out_channels: int
    expansion: int = 6
    kernel: int = 3
    stride: int = 1
    se_ratio: float = 0.25
    simam_after_dw: bool = False
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.expansion not in (1, 6):
            raise ConfigError(f"expansion must be 1 or 6, got {self.expansion}")
        if self.kernel not in (3, 5):
            raise ConfigError(f"kernel must be 3 or 5, got {self.kernel}")
        if self.stride not in (1, 2):
            raise ConfigError(f"stride must be 1 or 2, got {self.stride}")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ConfigError(
                f"channel counts must be positive: {self.in_channels} -> {self.out_channels}"
            )
        if not 0 < self.se_ratio <= 1:
            raise ConfigError(f"se_ratio must be in (0, 1], got {self.se_ratio}")
        if self.expanded_channels % self.squeezed_channels:
            raise ConfigError(
                f"SE squeeze {self.squeezed_channels} does not divide "
                f"{self.expanded_channels} expanded channels"
            )

    @property
    def expanded_channels(self):
        return self.in_channels * self.expansion

    @property
    def squeezed_channels(self):
        return max(1, int(self.in_channels * self.se_ratio))

    @property
    def se_reduction(self):
        return self.expanded_channels // self.squeezed_channels

    @property
    def has_skip(self):
        return self.stride == 1 and self.in_channels == self.out_channels


def mbconv_param_count(spec):
    """Trainable scalars of an MBConv, BN affine parameters included."""
    exp = spec.expanded_channels
    count = 0
    if spec.expansion != 1:
        count += spec.in_channels * exp + 2 * exp
    count += exp * spec.kernel * spec.kernel + 2 * exp
    count += 2 * exp * spec.squeezed_channels
    count += exp * spec.out_channels + 2 * spec.out_channels
    return count


@dataclass(eq=False)
class MBConv(Module):
    spec: MBConvSpec
    dtype: str = DEFAULT_DTYPE
    rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        spec = self.spec
        rng = self.rng if self.rng is not None else np.random.default_rng(0)
        self.rng = None
        exp = spec.expanded_channels

        if spec.expansion != 1:
            self.expand = Conv2d(spec.in_channels, exp, 1, dtype=self.dtype, rng=rng)
            self.expand_bn = BatchNorm2d(exp, dtype=self.dtype)
            self.expand_act = Activation("silu")
        else:
            self.expand = None

        self.depthwise = Conv2d(
            exp,
            exp,
            spec.kernel,
            stride=spec.stride,
            groups=exp,
            dtype=self.dtype,
            rng=rng,
        )
        self.simam = SimAM(spec.lam) if spec.simam_after_dw else None
        self.depthwise_bn = BatchNorm2d(exp, dtype=self.dtype)
        self.depthwise_act = Activation("silu")
        self.se = SELayer(exp, spec.se_reduction, dtype=self.dtype, rng=rng)
        self.project = Conv2d(exp, spec.out_channels, 1, dtype=self.dtype, rng=rng)
        self.project_bn = BatchNorm2d(spec.out_channels, dtype=self.dtype)

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.spec.in_channels:
            raise ShapeError(
                f"MBConv expects {self.spec.in_channels} input channels, got {x.shape}"
            )
        h = x
        if self.expand is not None:
            h = self.expand_act(self.expand_bn(self.expand(h)))
        h = self.depthwise(h)
        if self.simam is not None:
            h = self.simam(h)
        h = self.depthwise_act(self.depthwise_bn(h))
        h = self.se(h)
        h = self.project_bn(self.project(h))
        if self.spec.has_skip:
            h = F.add(h, x)
        return h

    def cost(self, shape):
        counts = zero_counts()
        layers = []
        if self.expand is not None:
            layers += [self.expand, self.expand_bn, self.expand_act]
        layers.append(self.depthwise)
        if self.simam is not None:
            layers.append(self.simam)
        layers += [
            self.depthwise_bn,
            self.depthwise_act,
            self.se,
            self.project,
            self.project_bn,
        ]
        for layer in layers:
            shape, layer_counts = layer.cost(shape)
            counts.update(layer_counts)
        return shape, counts

    def depthwise_output_shape(self, shape):
        """Shape of the tensor the SimAM hook sees for an input of `shape`."""
        if self.expand is not None:
            shape, _ = self.expand.cost(shape)
        shape, _ = self.depthwise.cost(shape)
        return shape
