from .layers import Activation, BatchNorm2d, Conv2d, Linear, Sequential
from .blocks import MBConv, MBConvSpec, mbconv_param_count
from .network import (
    ArchitectureConfig,
    CostReport,
    Network,
    SimamInsertion,
    StageOperator,
    StageSpec,
    build,
    cost_report,
    count_macs,
    count_params,
    load_architecture,
    round_channels,
)

__all__ = [
    "Activation",
    "BatchNorm2d",
    "Conv2d",
    "Linear",
    "Sequential",
    "MBConv",
    "MBConvSpec",
    "mbconv_param_count",
    "ArchitectureConfig",
    "CostReport",
    "Network",
    "SimamInsertion",
    "StageOperator",
    "StageSpec",
    "build",
    "cost_report",
    "count_macs",
    "count_params",
    "load_architecture",
    "round_channels",
]
