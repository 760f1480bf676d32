# -*- coding: utf-8 -*-
"""
Squeeze-and-Excitation as a runnable layer, plus parameter-count formulas
for the common attention modules.
"""
import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ConfigError, ShapeError
from ..modules import Module, Parameter, zero_counts
from ..settings import DEFAULT_DTYPE
from ..tensor import functional as F


class AttentionKind(Enum):
    CBAM = "CBAM"
    SE = "SE"
    GC = "GC"
    SRM = "SRM"
    ECA = "ECA"
    SimAM = "SimAM"


OPERATORS = {
    AttentionKind.CBAM: "C2D, GAP, GMP, FC, ReLU, CAP, CMP, BN",
    AttentionKind.SE: "GAP, FC, ReLU",
    AttentionKind.GC: "C1D, Softmax, LN, FC, ReLU",
    AttentionKind.SRM: "GAP, GSP, CFC, BN",
    AttentionKind.ECA: "GAP, C1D",
    AttentionKind.SimAM: "GAP, identity, output, +",
}

FORMULAS = {
    AttentionKind.CBAM: "2C^2/r + 2K^2",
    AttentionKind.SE: "2C^2/r",
    AttentionKind.GC: "2C^2/r + C",
    AttentionKind.SRM: "6C",
    AttentionKind.ECA: "K",
    AttentionKind.SimAM: "0",
}

DESIGN = {kind: "handcrafted" for kind in AttentionKind}
DESIGN[AttentionKind.SimAM] = "closed-form energy"


@dataclass(frozen=True)
class AttentionCostSpec:
    module_kind: AttentionKind
    C: int
    r: int = 16
    K: int = 3

    def __post_init__(self):
        kind = self.module_kind
        if not isinstance(kind, AttentionKind):
            try:
                kind = AttentionKind(kind)
            except ValueError:
                raise ConfigError(f"unknown attention module kind {kind!r}")
            object.__setattr__(self, "module_kind", kind)

        if self.C < 1:
            raise ConfigError(f"C must be >= 1, got {self.C}")
        if self.r < 1:
            raise ConfigError(f"r must be >= 1, got {self.r}")
        if kind in (AttentionKind.SE, AttentionKind.CBAM, AttentionKind.GC):
            if self.C % self.r:
                raise ConfigError(f"r={self.r} does not divide C={self.C}")
        if kind in (AttentionKind.ECA, AttentionKind.CBAM):
            if self.K < 1 or self.K % 2 == 0:
                raise ConfigError(f"K must be a positive odd number, got {self.K}")


def param_count(spec):
    C, r, K = spec.C, spec.r, spec.K
    kind = spec.module_kind
    if kind is AttentionKind.CBAM:
        return 2 * C * C // r + 2 * K * K
    elif kind is AttentionKind.SE:
        return 2 * C * C // r
    elif kind is AttentionKind.GC:
        return 2 * C * C // r + C
    elif kind is AttentionKind.SRM:
        return 6 * C
    elif kind is AttentionKind.ECA:
        return K
    elif kind is AttentionKind.SimAM:
        return 0
    raise ConfigError(f"unknown attention module kind {kind!r}")


def cost_table(C, r=16, K=3):
    rows = []
    for kind in AttentionKind:
        spec = AttentionCostSpec(kind, C=C, r=r, K=K)
        rows.append(
            {
                "module": kind.value,
                "operators": OPERATORS[kind],
                "formula": FORMULAS[kind],
                "parameters": param_count(spec),
                "design": DESIGN[kind],
            }
        )
    return rows


def render_cost_table(rows, fmt="text"):
    columns = ["module", "operators", "formula", "parameters", "design"]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()

    widths = {
        c: max(len(c), *(len(str(row[c])) for row in rows)) for c in columns
    }
    lines = [" | ".join(c.ljust(widths[c]) for c in columns)]
    lines.append("-+-".join("-" * widths[c] for c in columns))
    for row in rows:
        lines.append(" | ".join(str(row[c]).ljust(widths[c]) for c in columns))
    return "\n".join(lines) + "\n"


@dataclass(eq=False)
class SELayer(Module):
    """
    Squeeze (global average pooling), excitation (FC, ReLU, FC, sigmoid)
    and scale. Both FC layers are bias-free: 2 C^2 / r parameters.
    """

    channels: int
    reduction: int = 16
    dtype: str = DEFAULT_DTYPE
    rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        if self.reduction < 1 or self.channels % self.reduction:
            raise ConfigError(
                f"SE reduction {self.reduction} does not divide "
                f"{self.channels} channels"
            )
        rng = self.rng if self.rng is not None else np.random.default_rng(0)
        self.rng = None

        squeezed = self.channels // self.reduction
        self.fc1 = Parameter(
            _uniform(rng, (squeezed, self.channels)), dtype=self.dtype
        )
        self.fc2 = Parameter(
            _uniform(rng, (self.channels, squeezed)), dtype=self.dtype
        )

    @property
    def squeezed(self):
        return self.channels // self.reduction

    def forward(self, x):
        if x.shape[1] != self.channels:
            raise ShapeError(
                f"SE expects {self.channels} channels, got input {x.shape}"
            )
        s = F.global_avg_pool(x)
        z = F.relu(F.linear(s, self.fc1))
        gate = F.sigmoid(F.linear(z, self.fc2))
        return F.channel_scale(x, gate)

    def cost(self, shape):
        N, C, H, W = shape
        counts = zero_counts()
        counts["macs"] = 2 * N * C * self.squeezed
        counts["activation"] = N * (self.squeezed + C) + N * C * H * W
        return shape, counts


def _uniform(rng, shape):
    bound = 1.0 / np.sqrt(shape[1])
    return rng.uniform(-bound, bound, size=shape)
