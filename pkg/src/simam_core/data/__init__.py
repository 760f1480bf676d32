from .augmentations import AugmentationConfig, augment, preprocess, sample_rng
from .datasets import (
    Dataset,
    DatasetInfo,
    DatasetStats,
    Sample,
    Split,
    compute_stats,
    load_dataset,
    load_splits,
    read_sidecar,
    write_sidecar,
)
from .loader import BatchLoader, epoch_order
from .synthetic import SHAPES, generate_synthetic

__all__ = [
    "AugmentationConfig",
    "augment",
    "preprocess",
    "sample_rng",
    "Dataset",
    "DatasetInfo",
    "DatasetStats",
    "Sample",
    "Split",
    "compute_stats",
    "load_dataset",
    "load_splits",
    "read_sidecar",
    "write_sidecar",
    "BatchLoader",
    "epoch_order",
    "SHAPES",
    "generate_synthetic",
]
