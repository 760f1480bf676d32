# -*- coding: utf-8 -*-
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..modules import Module, Parameter, zero_counts
from ..settings import DEFAULT_DTYPE
from ..tensor import functional as F


def _rng(rng):
    return rng if rng is not None else np.random.default_rng(0)


@dataclass(eq=False)
class Conv2d(Module):
    in_channels: int
    out_channels: int
    kernel: int = 1
    stride: int = 1
    groups: int = 1
    bias: bool = False
    dtype: str = DEFAULT_DTYPE
    rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        if self.in_channels % self.groups or self.out_channels % self.groups:
            raise ShapeError(
                f"{self.in_channels} -> {self.out_channels} channels "
                f"cannot be split into {self.groups} groups"
            )
        rng = _rng(self.rng)
        self.rng = None

        k = self.kernel
        shape = (self.out_channels, self.in_channels // self.groups, k, k)
        # He initialization, fan-out mode
        fan_out = self.out_channels * k * k // self.groups
        self.weight = Parameter(
            rng.normal(0.0, np.sqrt(2.0 / fan_out), size=shape),
            dtype=self.dtype,
        )
        self.bias_param = (
            Parameter(np.zeros(self.out_channels), decay=False, dtype=self.dtype)
            if self.bias
            else None
        )

    @property
    def padding(self):
        return self.kernel // 2

    def forward(self, x):
        return F.conv2d(
            x,
            self.weight,
            self.bias_param,
            stride=self.stride,
            padding=self.padding,
            groups=self.groups,
        )

    def cost(self, shape):
        N, C, H, W = shape
        if C != self.in_channels:
            raise ShapeError(f"conv expects {self.in_channels} channels, got {shape}")
        out_h = F.conv_output_size(H, self.kernel, self.stride, self.padding)
        out_w = F.conv_output_size(W, self.kernel, self.stride, self.padding)
        counts = zero_counts()
        counts["macs"] = (
            self.kernel
            * self.kernel
            * (self.in_channels // self.groups)
            * self.out_channels
            * out_h
            * out_w
            * N
        )
        return (N, self.out_channels, out_h, out_w), counts


@dataclass(eq=False)
class BatchNorm2d(Module):
    channels: int
    momentum: float = 0.1
    eps: float = 1e-5
    dtype: str = DEFAULT_DTYPE

    buffer_names = ("running_mean", "running_var")

    def __post_init__(self):
        self.gamma = Parameter(np.ones(self.channels), decay=False, dtype=self.dtype)
        self.beta = Parameter(np.zeros(self.channels), decay=False, dtype=self.dtype)
        self.running_mean = np.zeros(self.channels)
        self.running_var = np.ones(self.channels)

    def forward(self, x):
        out, (mean, var) = F.batch_norm(
            x,
            self.gamma,
            self.beta,
            self.running_mean,
            self.running_var,
            training=self.training,
            momentum=self.momentum,
            eps=self.eps,
        )
        self.running_mean, self.running_var = mean, var
        return out

    def cost(self, shape):
        counts = zero_counts()
        counts["norm"] = 2 * int(np.prod(shape))
        return shape, counts


ACTIVATIONS = {
    "silu": F.silu,
    "relu": F.relu,
    "sigmoid": F.sigmoid,
}


@dataclass(eq=False)
class Activation(Module):
    kind: str = "silu"

    def __post_init__(self):
        if self.kind not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.kind!r}")

    def forward(self, x):
        return ACTIVATIONS[self.kind](x)

    def cost(self, shape):
        counts = zero_counts()
        counts["activation"] = int(np.prod(shape))
        return shape, counts


@dataclass(eq=False)
class Linear(Module):
    in_features: int
    out_features: int
    bias: bool = True
    dtype: str = DEFAULT_DTYPE
    rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        rng = _rng(self.rng)
        self.rng = None
        bound = 1.0 / np.sqrt(self.out_features)
        self.weight = Parameter(
            rng.uniform(-bound, bound, size=(self.out_features, self.in_features)),
            dtype=self.dtype,
        )
        self.bias_param = (
            Parameter(np.zeros(self.out_features), decay=False, dtype=self.dtype)
            if self.bias
            else None
        )

    def forward(self, x):
        return F.linear(x, self.weight, self.bias_param)

    def cost(self, shape):
        N, features = shape[0], shape[1]
        if features != self.in_features:
            raise ShapeError(f"linear expects {self.in_features} features, got {shape}")
        counts = zero_counts()
        counts["macs"] = N * self.in_features * self.out_features
        return (N, self.out_features), counts


@dataclass(eq=False)
class Sequential(Module):
    layers: list

    def forward(self, x):
        for layer in self.layers:
            x = layer(x)
        return x

    def cost(self, shape):
        counts = zero_counts()
        for layer in self.layers:
            shape, layer_counts = layer.cost(shape)
            counts.update(layer_counts)
        return shape, counts
