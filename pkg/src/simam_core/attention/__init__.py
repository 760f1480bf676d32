from .simam import (
    DEFAULT_LAMBDA,
    EnergyParams,
    EnergyMap,
    ChannelStats,
    SimAM,
    channel_stats,
    simam_energy,
    simam_refine,
)
from .zoo import (
    AttentionKind,
    AttentionCostSpec,
    SELayer,
    cost_table,
    param_count,
    render_cost_table,
)

__all__ = [
    "DEFAULT_LAMBDA",
    "EnergyParams",
    "EnergyMap",
    "ChannelStats",
    "SimAM",
    "channel_stats",
    "simam_energy",
    "simam_refine",
    "AttentionKind",
    "AttentionCostSpec",
    "SELayer",
    "cost_table",
    "param_count",
    "render_cost_table",
]
