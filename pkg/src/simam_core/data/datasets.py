# -*- coding: utf-8 -*-
"""
Image-classification datasets described by a CSV manifest.

The manifest has the header ``path,label,split``; paths are relative to the
dataset root, labels are integer class indices and split is ``train`` or
``test``. An optional ``dataset.json`` sidecar next to the manifest carries
the class names and the per-channel mean/std of the training split.
"""
import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .. import schema
from ..errors import ConfigError, DataError
from .augmentations import open_image

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ("path", "label", "split")
SIDECAR = "dataset.json"


class Split(Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class DatasetStats:
    mean: Tuple[float, float, float]
    std: Tuple[float, float, float]

    def __post_init__(self):
        if len(self.mean) != 3 or len(self.std) != 3:
            raise DataError("dataset statistics need three channels")
        if min(self.std) <= 0:
            raise DataError(f"channel std must be positive, got {self.std}")


@dataclass
class DatasetInfo:
    class_names: List[str]
    stats: Optional[DatasetStats] = None


@dataclass(frozen=True)
class Sample:
    source: object
    label: int


@dataclass
class Dataset:
    samples: List[Sample]
    class_names: List[str]
    split: Split = Split.TRAIN
    stats: Optional[DatasetStats] = None
    root: Optional[Path] = field(default=None, repr=False)

    def __post_init__(self):
        for i, sample in enumerate(self.samples):
            if not 0 <= sample.label < self.num_classes:
                raise DataError(
                    f"sample {i}: label {sample.label} outside 0..{self.num_classes - 1}"
                )

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, index):
        return self.samples[index]

    @property
    def num_classes(self):
        return len(self.class_names)

    @property
    def labels(self):
        return np.array([s.label for s in self.samples], dtype=np.int64)


def compute_stats(dataset):
    """Per-channel mean and (population) std of the decoded pixels in [0, 1]."""
    if not len(dataset):
        raise DataError("cannot compute statistics of an empty dataset")
    total = np.zeros(3)
    total_sq = np.zeros(3)
    count = 0
    for sample in dataset.samples:
        pixels = np.asarray(open_image(sample.source), dtype=np.float64) / 255.0
        pixels = pixels.reshape(-1, 3)
        total += pixels.sum(axis=0)
        total_sq += np.square(pixels).sum(axis=0)
        count += pixels.shape[0]
    mean = total / count
    std = np.sqrt(np.maximum(total_sq / count - np.square(mean), 0.0))
    std = np.where(std > 1e-6, std, 1.0)
    return DatasetStats(tuple(float(m) for m in mean), tuple(float(s) for s in std))


def read_sidecar(root):
    path = Path(root) / SIDECAR
    if not path.exists():
        return None
    try:
        return schema.load(DatasetInfo, path)
    except ConfigError as exc:
        raise DataError(f"bad dataset sidecar {path}: {exc}") from exc


def write_sidecar(root, info):
    path = Path(root) / SIDECAR
    path.write_text(schema.dumps(info), encoding="utf-8")
    return path


def _read_manifest(root, manifest):
    path = Path(root) / manifest
    if not path.exists():
        raise DataError(f"manifest not found: {path}")

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
            raise DataError(f"{path}: header must be {','.join(MANIFEST_COLUMNS)}")

        rows = []
        seen = {}
        # line numbers count the header as line 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}: line {lineno}: expected 3 columns, got {len(row)}")
            rel, label, split = (value.strip() for value in row)

            try:
                label = int(label)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: label {label!r} is not an integer")
            if label < 0:
                raise DataError(f"{path}: line {lineno}: negative label {label}")
            try:
                split = Split(split)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: unknown split {split!r}")

            if not (Path(root) / rel).is_file():
                raise DataError(f"{path}: line {lineno}: missing image {rel}")
            if rel in seen and seen[rel][0] is not split:
                raise DataError(
                    f"{path}: line {lineno}: {rel} already listed in the "
                    f"{seen[rel][0].value} split on line {seen[rel][1]}"
                )
            seen.setdefault(rel, (split, lineno))
            rows.append((lineno, rel, label, split))

    if not rows:
        raise DataError(f"{path}: manifest lists no images")
    return rows


def load_splits(root, manifest="manifest.csv"):
    """Both splits of a dataset, sharing class names and training statistics."""
    root = Path(root)
    rows = _read_manifest(root, manifest)
    info = read_sidecar(root)

    num_labels = max(label for _, _, label, _ in rows) + 1
    if info is None:
        class_names = [str(i) for i in range(num_labels)]
    else:
        class_names = list(info.class_names)
        for lineno, _, label, _ in rows:
            if label >= len(class_names):
                raise DataError(
                    f"{root / manifest}: line {lineno}: label {label} outside "
                    f"0..{len(class_names) - 1}"
                )

    splits = {}
    for split in Split:
        samples = [
            Sample(root / rel, label) for _, rel, label, s in rows if s is split
        ]
        splits[split] = Dataset(samples, class_names, split, root=root)

    stats = info.stats if info is not None else None
    if stats is None:
        train = splits[Split.TRAIN]
        if not len(train):
            raise DataError(f"{root / manifest}: no training images")
        logger.info("computing channel statistics over %d training images", len(train))
        stats = compute_stats(train)
        write_sidecar(root, DatasetInfo(class_names, stats))

    for dataset in splits.values():
        dataset.stats = stats

    logger.info(
        "loaded %s: %d classes, %d train / %d test images",
        root,
        len(class_names),
        len(splits[Split.TRAIN]),
        len(splits[Split.TEST]),
    )
    return splits[Split.TRAIN], splits[Split.TEST]


def load_dataset(root, manifest="manifest.csv", split="train"):
    train, test = load_splits(root, manifest)
    return train if Split(split) is Split.TRAIN else test
