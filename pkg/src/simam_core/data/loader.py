# -*- coding: utf-8 -*-
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import settings
from ..errors import ConfigError
from ..tensor import Tensor
from .augmentations import AugmentationConfig, preprocess, sample_rng

logger = logging.getLogger(__name__)


def epoch_order(n, seed, epoch, shuffle=True):
    if not shuffle:
        return np.arange(n)
    return np.random.default_rng([seed, epoch]).permutation(n)


@dataclass
class BatchLoader:
    """
    Iterates `(images, labels)` batches of a dataset for one epoch.

    Decoding and augmentation run on a small thread pool, at most `prefetch`
    batches ahead of the consumer. Every sample draws its randomness from
    `(seed, epoch, sample index)`, so the produced batches do not depend on
    the number of workers.
    """

    dataset: object
    batch_size: int
    image_size: int
    seed: int = 0
    epoch: int = 0
    augmentation: Optional[AugmentationConfig] = None
    shuffle: bool = True
    dtype: str = settings.TRAIN_DTYPE
    prefetch: int = settings.PREFETCH
    workers: int = settings.WORKERS

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")

    def __len__(self):
        return -(-len(self.dataset) // self.batch_size)

    def _load(self, index):
        sample = self.dataset[index]
        rng = None
        if self.augmentation is not None:
            rng = sample_rng(self.seed, self.epoch, index)
        image = preprocess(
            sample.source,
            self.image_size,
            aug=self.augmentation,
            rng=rng,
            stats=self.dataset.stats,
        )
        return image, sample.label

    def _batches(self):
        order = epoch_order(len(self.dataset), self.seed, self.epoch, self.shuffle)
        for start in range(0, len(order), self.batch_size):
            yield order[start : start + self.batch_size]

    def _collate(self, items):
        images = np.stack([image for image, _ in items])
        labels = np.array([label for _, label in items], dtype=np.int64)
        return Tensor(images, dtype=self.dtype), labels

    def __iter__(self):
        if self.workers < 1:
            for indices in self._batches():
                yield self._collate([self._load(i) for i in indices])
            return

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            pending = deque()
            batches = self._batches()
            for indices in batches:
                pending.append([pool.submit(self._load, i) for i in indices])
                if len(pending) > self.prefetch:
                    break
            while pending:
                futures = pending.popleft()
                yield self._collate([f.result() for f in futures])
                indices = next(batches, None)
                if indices is not None:
                    pending.append([pool.submit(self._load, i) for i in indices])
