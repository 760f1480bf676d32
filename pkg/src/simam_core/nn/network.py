# -*- coding: utf-8 -*-
"""
Staged network assembled from a declarative stage table.

Stage 1 is the convolutional stem, the last stage is the head (convolution,
global pooling and the linear classifier), everything in between is a stack
of MBConv blocks. Strides follow from the resolution column: a stage whose
successor starts at half its resolution downsamples in its first block.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from .. import schema
from ..attention import DEFAULT_LAMBDA
from ..errors import ConfigError
from ..modules import Module, zero_counts
from ..settings import DEFAULT_DTYPE
from ..tensor import functional as F
from .blocks import MBConv, MBConvSpec
from .layers import Activation, BatchNorm2d, Conv2d, Linear, Sequential

logger = logging.getLogger(__name__)


class StageOperator(Enum):
    CONV3X3 = "Conv3x3"
    MBCONV1_K3 = "MBConv1-k3"
    MBCONV6_K3 = "MBConv6-k3"
    MBCONV6_K5 = "MBConv6-k5"
    HEAD_CONV1X1 = "Head-Conv1x1"
    HEAD_CONV3X3 = "Head-Conv3x3"

    @property
    def is_mbconv(self):
        return self.name.startswith("MBCONV")

    @property
    def is_head(self):
        return self.name.startswith("HEAD")

    @property
    def expansion(self):
        return 6 if self.name.startswith("MBCONV6") else 1

    @property
    def kernel(self):
        return 5 if self.name.endswith("K5") else 1 if self.name.endswith("1X1") else 3


@dataclass(frozen=True)
class StageSpec:
    index: int
    operator: StageOperator
    resolution: int
    channels: int
    layers: int = 1

    def __post_init__(self):
        if self.layers < 1:
            raise ConfigError(f"stage {self.index}: layers must be >= 1")
        if self.resolution < 1 or self.channels < 1:
            raise ConfigError(f"stage {self.index}: resolution and channels must be positive")


@dataclass(frozen=True)
class SimamInsertion:
    stage: int
    block: int
    lam: float = DEFAULT_LAMBDA


def _default_insertions():
    return [SimamInsertion(4, 1), SimamInsertion(5, 1)]


@dataclass(frozen=True)
class ArchitectureConfig:
    stages: List[StageSpec]
    simam_insertions: List[SimamInsertion] = field(default_factory=_default_insertions)
    num_classes: int = 196
    width_mult: float = 1.0
    depth_mult: float = 1.0
    input_size: int = 224
    se_ratio: float = 0.25
    name: str = ""

    def __post_init__(self):
        if len(self.stages) < 3:
            raise ConfigError("an architecture needs a stem, MBConv stages and a head")
        if self.stages[0].operator is not StageOperator.CONV3X3:
            raise ConfigError("stage 1 must be the Conv3x3 stem")
        if not self.stages[-1].operator.is_head:
            raise ConfigError("the last stage must be a head")
        for stage in self.stages[1:-1]:
            if not stage.operator.is_mbconv:
                raise ConfigError(f"stage {stage.index}: expected an MBConv operator")
        if [s.index for s in self.stages] != list(range(1, len(self.stages) + 1)):
            raise ConfigError("stage indices must be 1, 2, ... in order")
        if self.num_classes < 1:
            raise ConfigError(f"num_classes must be >= 1, got {self.num_classes}")
        if self.width_mult <= 0 or self.depth_mult <= 0:
            raise ConfigError("width_mult and depth_mult must be positive")
        for ins in self.simam_insertions:
            if ins.lam <= 0:
                raise ConfigError(f"insertion {ins.stage, ins.block}: lambda must be > 0")
        # stride derivation validates the resolution column
        self.strides()

    def channels(self, stage):
        return round_channels(stage.channels, self.width_mult)

    def layers(self, stage):
        if stage.operator.is_mbconv:
            return max(1, int(math.ceil(stage.layers * self.depth_mult)))
        return 1

    def strides(self):
        strides = []
        for stage, following in zip(self.stages, self.stages[1:]):
            ratio, rest = divmod(stage.resolution, following.resolution)
            if rest or ratio not in (1, 2):
                raise ConfigError(
                    f"stage {stage.index}: resolution {stage.resolution} -> "
                    f"{following.resolution} is not a stride of 1 or 2"
                )
            strides.append(ratio)
        strides.append(1)
        return strides

    def with_lambda(self, lam):
        return dataclasses.replace(
            self,
            simam_insertions=[
                dataclasses.replace(ins, lam=lam) for ins in self.simam_insertions
            ],
        )

    def without_simam(self):
        return dataclasses.replace(self, simam_insertions=[])


def round_channels(channels, width_mult, divisor=8):
    """Scale a channel count and round it to a multiple of `divisor` (>= divisor)."""
    value = channels * width_mult
    rounded = max(divisor, int(value + divisor / 2) // divisor * divisor)
    if rounded < 0.9 * value:
        rounded += divisor
    return rounded


def load_architecture(name_or_path):
    return schema.load(ArchitectureConfig, schema.resolve_path(name_or_path))


@dataclass
class StageTrace:
    index: int
    operator: StageOperator
    input_shape: tuple
    output_shape: tuple


@dataclass
class CostReport:
    params: int
    macs: int
    simam_ops: int
    norm_ops: int
    activation_ops: int
    input_hw: int

    @property
    def flops(self):
        return 2 * self.macs

    @property
    def params_m(self):
        return self.params / 1e6

    @property
    def macs_g(self):
        return self.macs / 1e9


@dataclass(eq=False)
class Network(Module):
    config: ArchitectureConfig
    dtype: str = DEFAULT_DTYPE
    seed: int = 0

    def __post_init__(self):
        cfg = self.config
        rng = np.random.default_rng(self.seed)
        strides = cfg.strides()
        insertions = {(i.stage, i.block): i for i in cfg.simam_insertions}

        stem_stage, head_stage = cfg.stages[0], cfg.stages[-1]
        channels = cfg.channels(stem_stage)
        self.stem = Sequential(
            [
                Conv2d(3, channels, 3, stride=strides[0], dtype=self.dtype, rng=rng),
                BatchNorm2d(channels, dtype=self.dtype),
                Activation("silu"),
            ]
        )

        self.blocks = []
        self.block_coords = []
        for stage, stride in zip(cfg.stages[1:-1], strides[1:-1]):
            out_channels = cfg.channels(stage)
            for b in range(1, cfg.layers(stage) + 1):
                insertion = insertions.pop((stage.index, b), None)
                spec = MBConvSpec(
                    in_channels=channels,
                    out_channels=out_channels,
                    expansion=stage.operator.expansion,
                    kernel=stage.operator.kernel,
                    stride=stride if b == 1 else 1,
                    se_ratio=cfg.se_ratio,
                    simam_after_dw=insertion is not None,
                    lam=insertion.lam if insertion else DEFAULT_LAMBDA,
                )
                self.blocks.append(MBConv(spec, dtype=self.dtype, rng=rng))
                self.block_coords.append((stage.index, b))
                channels = out_channels

        if insertions:
            stage, block = sorted(insertions)[0]
            raise ConfigError(
                f"SimAM insertion (stage {stage}, block {block}) does not "
                "reference an MBConv block"
            )

        head_channels = cfg.channels(head_stage)
        self.head = Sequential(
            [
                Conv2d(
                    channels,
                    head_channels,
                    head_stage.operator.kernel,
                    dtype=self.dtype,
                    rng=rng,
                ),
                BatchNorm2d(head_channels, dtype=self.dtype),
                Activation("silu"),
            ]
        )
        self.classifier = Linear(
            head_channels, cfg.num_classes, dtype=self.dtype, rng=rng
        )
        logger.debug(
            "built %s: %d blocks, %d parameters",
            cfg.name or "network",
            len(self.blocks),
            self.num_parameters(),
        )

    @property
    def insertion_points(self):
        return [
            coords
            for coords, block in zip(self.block_coords, self.blocks)
            if block.simam is not None
        ]

    def block_at(self, stage, block):
        return self.blocks[self.block_coords.index((stage, block))]

    def forward(self, x):
        h = self.stem(x)
        for block in self.blocks:
            h = block(h)
        h = self.head(h)
        return self.classifier(F.global_avg_pool(h))

    def cost(self, shape):
        counts = zero_counts()
        for part in [self.stem, *self.blocks, self.head]:
            shape, part_counts = part.cost(shape)
            counts.update(part_counts)
        shape, part_counts = self.classifier.cost(shape[:2])
        counts.update(part_counts)
        return shape, counts

    def shape_trace(self, input_hw):
        """Input and output shape of every stage for a 1 x 3 x H x W input."""
        traces = []
        shape = (1, 3, input_hw, input_hw)
        stages = {s.index: s for s in self.config.stages}

        out, _ = self.stem.cost(shape)
        traces.append(StageTrace(1, stages[1].operator, shape, out))
        shape = out

        for index in sorted({s for s, _ in self.block_coords}):
            start = shape
            for coords, block in zip(self.block_coords, self.blocks):
                if coords[0] == index:
                    shape, _ = block.cost(shape)
            traces.append(StageTrace(index, stages[index].operator, start, shape))

        head = self.config.stages[-1]
        out, _ = self.head.cost(shape)
        traces.append(StageTrace(head.index, head.operator, shape, out))
        return traces


def build(config, seed=0, dtype=DEFAULT_DTYPE):
    return Network(config, dtype=dtype, seed=seed)


def count_params(net):
    return net.num_parameters()


def cost_report(net, input_hw):
    _, counts = net.cost((1, 3, input_hw, input_hw))
    return CostReport(
        params=count_params(net),
        macs=counts["macs"],
        simam_ops=counts["simam"],
        norm_ops=counts["norm"],
        activation_ops=counts["activation"],
        input_hw=input_hw,
    )


def count_macs(net, input_hw):
    """Multiply-accumulates of the conv and linear layers for one image."""
    return cost_report(net, input_hw).macs
