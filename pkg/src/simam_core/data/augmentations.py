# -*- coding: utf-8 -*-
"""
Per-sample preprocessing: resize, the training augmentations (applied in the
fixed order flip -> rotate -> grayscale -> posterize), scaling to [0, 1] and
per-channel standardization.
"""
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageOps

from ..errors import ConfigError, DataError


@dataclass(frozen=True)
class AugmentationConfig:
    horizontal_flip_p: float = 0.5
    rotation_max_deg: float = 15.0
    grayscale_p: float = 0.1
    posterize_p: float = 0.2
    posterize_bits: int = 4

    def __post_init__(self):
        for name in ("horizontal_flip_p", "grayscale_p", "posterize_p"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.rotation_max_deg < 0:
            raise ConfigError(
                f"rotation_max_deg must be >= 0, got {self.rotation_max_deg}"
            )
        if not 1 <= self.posterize_bits <= 8:
            raise ConfigError(
                f"posterize_bits must be in 1..8, got {self.posterize_bits}"
            )

    @classmethod
    def disabled(cls):
        return cls(0.0, 0.0, 0.0, 0.0)


def sample_rng(seed, epoch, index):
    """Randomness stream of one sample; independent of batching and threads."""
    return np.random.default_rng([seed, epoch, index])


def open_image(source):
    if isinstance(source, Image.Image):
        return source.convert("RGB")
    try:
        with Image.open(source) as image:
            if image.format not in ("PNG", "JPEG"):
                raise DataError(f"{source}: unsupported image format {image.format}")
            return image.convert("RGB")
    except DataError:
        raise
    except (OSError, ValueError) as exc:
        raise DataError(f"{source}: cannot decode image ({exc})") from exc


def fill_color(stats):
    if stats is None:
        return (128, 128, 128)
    return tuple(int(round(255 * m)) for m in stats.mean)


def augment(image, aug, rng, fill=(128, 128, 128)):
    # always draw the four numbers so the stream layout is fixed
    flip_u, angle_u, gray_u, posterize_u = rng.random(4)

    if flip_u < aug.horizontal_flip_p:
        image = ImageOps.mirror(image)

    if aug.rotation_max_deg > 0:
        angle = (2.0 * angle_u - 1.0) * aug.rotation_max_deg
        image = image.rotate(angle, resample=Image.BILINEAR, fillcolor=fill)

    if gray_u < aug.grayscale_p:
        image = ImageOps.grayscale(image).convert("RGB")

    if posterize_u < aug.posterize_p:
        image = ImageOps.posterize(image, aug.posterize_bits)

    return image


def preprocess(image, size, aug=None, rng=None, stats=None):
    """
    Decode (if needed), resize to `size` x `size`, optionally augment, and
    return a 3 x size x size float64 array.
    """
    image = open_image(image)
    if image.size != (size, size):
        image = image.resize((size, size), resample=Image.BILINEAR)

    if aug is not None:
        if rng is None:
            raise ValueError("augmentation needs a random generator")
        image = augment(image, aug, rng, fill=fill_color(stats))

    array = np.asarray(image, dtype=np.float64).transpose(2, 0, 1) / 255.0
    if stats is not None:
        mean = np.asarray(stats.mean, dtype=np.float64)[:, None, None]
        std = np.asarray(stats.std, dtype=np.float64)[:, None, None]
        array = (array - mean) / std
    return array
