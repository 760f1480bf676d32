# -*- coding: utf-8 -*-
"""
Seeded toy dataset of coloured shapes for desk-scale runs.

Every class is one shape; position, size, colours and pixel noise vary per
image. The same arguments always produce byte-identical files.
"""
import csv
import logging
import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from ..errors import ConfigError
from .datasets import (
    MANIFEST_COLUMNS,
    Dataset,
    DatasetInfo,
    Sample,
    Split,
    compute_stats,
    write_sidecar,
)

logger = logging.getLogger(__name__)

SHAPES = (
    "circle",
    "square",
    "triangle",
    "diamond",
    "cross",
    "ring",
    "hbar",
    "vbar",
    "hexagon",
    "star",
)

SPLIT_CODES = {"train": 0, "test": 1}


def _polygon(cx, cy, radius, sides, phase=0.0, inner=None):
    points = []
    steps = sides * 2 if inner else sides
    for k in range(steps):
        angle = phase + 2 * math.pi * k / steps
        r = inner if inner and k % 2 else radius
        points.append((cx + r * math.cos(angle), cy + r * math.sin(angle)))
    return points


def draw_shape(shape, size, rng):
    background = tuple(int(v) for v in rng.integers(0, 96, size=3))
    color = tuple(int(v) for v in rng.integers(128, 256, size=3))
    radius = size * rng.uniform(0.22, 0.34)
    cx = size / 2 + rng.uniform(-0.12, 0.12) * size
    cy = size / 2 + rng.uniform(-0.12, 0.12) * size

    image = Image.new("RGB", (size, size), background)
    draw = ImageDraw.Draw(image)
    box = (cx - radius, cy - radius, cx + radius, cy + radius)
    thick = max(2, int(radius / 3))

    if shape == "circle":
        draw.ellipse(box, fill=color)
    elif shape == "square":
        draw.rectangle(box, fill=color)
    elif shape == "triangle":
        draw.polygon(_polygon(cx, cy, radius, 3, -math.pi / 2), fill=color)
    elif shape == "diamond":
        draw.polygon(_polygon(cx, cy, radius, 4), fill=color)
    elif shape == "cross":
        draw.rectangle((cx - radius, cy - thick / 2, cx + radius, cy + thick / 2), fill=color)
        draw.rectangle((cx - thick / 2, cy - radius, cx + thick / 2, cy + radius), fill=color)
    elif shape == "ring":
        draw.ellipse(box, outline=color, width=thick)
    elif shape == "hbar":
        draw.rectangle((cx - radius, cy - thick, cx + radius, cy + thick), fill=color)
    elif shape == "vbar":
        draw.rectangle((cx - thick, cy - radius, cx + thick, cy + radius), fill=color)
    elif shape == "hexagon":
        draw.polygon(_polygon(cx, cy, radius, 6), fill=color)
    elif shape == "star":
        draw.polygon(
            _polygon(cx, cy, radius, 5, -math.pi / 2, inner=radius * 0.45), fill=color
        )
    else:
        raise ConfigError(f"unknown shape {shape!r}")

    pixels = np.asarray(image, dtype=np.int16)
    noise = rng.integers(-12, 13, size=pixels.shape)
    return Image.fromarray(np.clip(pixels + noise, 0, 255).astype(np.uint8))


def generate_synthetic(
    root,
    num_classes=10,
    train_per_class=40,
    test_per_class=10,
    image_size=64,
    seed=0,
):
    """
    Write PNG images, ``manifest.csv`` and ``dataset.json`` under `root`.

    Returns the `(train, test)` datasets that were written.
    """
    if not 1 <= num_classes <= len(SHAPES):
        raise ConfigError(f"num_classes must be in 1..{len(SHAPES)}, got {num_classes}")
    if train_per_class < 1 or test_per_class < 0:
        raise ConfigError("need at least one training image per class")

    root = Path(root)
    class_names = list(SHAPES[:num_classes])
    rows = []
    datasets = {}

    for split, per_class in (("train", train_per_class), ("test", test_per_class)):
        rng = np.random.default_rng([seed, SPLIT_CODES[split]])
        samples = []
        for i in range(per_class * num_classes):
            label = i % num_classes
            rel = Path("images") / split / class_names[label] / f"{i:05d}.png"
            path = root / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            draw_shape(class_names[label], image_size, rng).save(path, format="PNG")
            rows.append((rel.as_posix(), label, split))
            samples.append(Sample(path, label))
        datasets[split] = Dataset(samples, class_names, Split(split), root=root)

    with open(root / "manifest.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        writer.writerows(rows)

    stats = compute_stats(datasets["train"])
    write_sidecar(root, DatasetInfo(class_names, stats))
    for dataset in datasets.values():
        dataset.stats = stats

    logger.info(
        "wrote %d synthetic images (%d classes) to %s", len(rows), num_classes, root
    )
    return datasets["train"], datasets["test"]
