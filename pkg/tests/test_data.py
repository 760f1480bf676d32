import csv
import json

import numpy as np
import pytest
from PIL import Image

from simam_core import schema
from simam_core.data import (
    SHAPES,
    AugmentationConfig,
    BatchLoader,
    Dataset,
    DatasetInfo,
    DatasetStats,
    Sample,
    Split,
    augment,
    compute_stats,
    epoch_order,
    generate_synthetic,
    load_dataset,
    load_splits,
    preprocess,
    read_sidecar,
    sample_rng,
    write_sidecar,
)
from simam_core.errors import ConfigError, DataError


def _write_manifest(root, rows, header=("path", "label", "split")):
    with open(root / "manifest.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _image(root, rel, color=(200, 10, 10), size=8):
    path = root / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (size, size), color).save(path, format="PNG")
    return rel


def test_synthetic_layout(shapes_root, shapes):
    train, test = shapes
    assert (len(train), len(test)) == (24, 8)
    assert train.class_names == list(SHAPES[:4])
    assert train.split is Split.TRAIN and test.split is Split.TEST
    assert np.bincount(train.labels).tolist() == [6, 6, 6, 6]
    assert read_sidecar(shapes_root).stats == train.stats


def test_splits_are_disjoint(shapes):
    train, test = shapes
    assert not {s.source for s in train} & {s.source for s in test}


def _files(root):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


def test_generation_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        generate_synthetic(
            tmp_path / name,
            num_classes=3,
            train_per_class=2,
            test_per_class=1,
            image_size=16,
            seed=11,
        )
    files = _files(tmp_path / "a")
    assert files == _files(tmp_path / "b")
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_seed_changes_images(tmp_path):
    for seed in (1, 2):
        generate_synthetic(tmp_path / str(seed), num_classes=1, train_per_class=1, seed=seed)
    rel = "images/train/circle/00000.png"
    assert (tmp_path / "1" / rel).read_bytes() != (tmp_path / "2" / rel).read_bytes()


@pytest.mark.parametrize("num_classes", [0, len(SHAPES) + 1])
def test_synthetic_class_range(tmp_path, num_classes):
    with pytest.raises(ConfigError):
        generate_synthetic(tmp_path, num_classes=num_classes)


def test_missing_manifest(tmp_path):
    with pytest.raises(DataError, match="manifest not found"):
        load_splits(tmp_path)


def test_empty_manifest(tmp_path):
    _write_manifest(tmp_path, [])
    with pytest.raises(DataError, match="no images"):
        load_splits(tmp_path)


def test_bad_header(tmp_path):
    _write_manifest(tmp_path, [], header=("file", "class", "split"))
    with pytest.raises(DataError, match="header"):
        load_splits(tmp_path)


@pytest.mark.parametrize(
    "bad_row,message",
    [
        (["b.png", "x", "train"], "line 3: label 'x' is not an integer"),
        (["b.png", "-1", "train"], "line 3: negative label"),
        (["b.png", "0", "val"], "line 3: unknown split 'val'"),
        (["missing.png", "0", "train"], "line 3: missing image missing.png"),
        (["a.png", "0", "test"], "line 3: a.png already listed in the train split on line 2"),
        (["b.png", "0"], "line 3: expected 3 columns"),
    ],
)
def test_row_errors_name_the_line(tmp_path, bad_row, message):
    _image(tmp_path, "a.png")
    _image(tmp_path, "b.png")
    _write_manifest(tmp_path, [["a.png", "0", "train"], bad_row])
    with pytest.raises(DataError, match=message):
        load_splits(tmp_path)


def test_label_outside_sidecar_classes(tmp_path):
    _image(tmp_path, "a.png")
    _write_manifest(tmp_path, [["a.png", "2", "train"]])
    write_sidecar(tmp_path, DatasetInfo(["x", "y"]))
    with pytest.raises(DataError, match="line 2: label 2 outside 0..1"):
        load_splits(tmp_path)


def test_stats_are_computed_and_cached(tmp_path):
    _image(tmp_path, "a.png", color=(255, 0, 51))
    _image(tmp_path, "b.png", color=(255, 0, 51))
    _write_manifest(tmp_path, [["a.png", "0", "train"], ["b.png", "1", "test"]])
    train, test = load_splits(tmp_path)

    assert train.class_names == ["0", "1"]
    assert train.stats.mean == pytest.approx((1.0, 0.0, 0.2))
    # constant channels fall back to unit std
    assert train.stats.std == (1.0, 1.0, 1.0)
    assert test.stats == train.stats
    assert read_sidecar(tmp_path).stats == train.stats
    assert len(load_dataset(tmp_path, split="test")) == 1


def test_sidecar_validation(tmp_path):
    (tmp_path / "dataset.json").write_text(
        json.dumps({"class_names": ["a"], "stats": {"mean": [0, 0, 0], "std": [1, 0, 1]}})
    )
    with pytest.raises(DataError):
        read_sidecar(tmp_path)


@pytest.mark.slow
def test_stanford_cars_sized_manifest(tmp_path):
    rows = []
    for split, count in (("train", 8144), ("test", 8041)):
        folder = tmp_path / split
        folder.mkdir()
        for i in range(count):
            (folder / f"{i:05d}.jpg").touch()
            rows.append([f"{split}/{i:05d}.jpg", str(i % 196), split])
    _write_manifest(tmp_path, rows)
    stats = DatasetStats((0.47, 0.46, 0.45), (0.29, 0.29, 0.30))
    write_sidecar(tmp_path, DatasetInfo([f"car_{i}" for i in range(196)], stats))

    train, test = load_splits(tmp_path)
    assert (len(train), len(test)) == (8144, 8041)
    assert train.num_classes == test.num_classes == 196


def test_dataset_rejects_out_of_range_labels():
    with pytest.raises(DataError):
        Dataset([Sample("x.png", 3)], ["a", "b"])


def test_compute_stats(tmp_path):
    image = np.zeros((2, 2, 3), dtype=np.uint8)
    image[0, :, 0] = 255
    dataset = Dataset([Sample(Image.fromarray(image), 0)], ["a"])
    stats = compute_stats(dataset)
    assert stats.mean[0] == pytest.approx(0.5)
    assert stats.std[0] == pytest.approx(0.5)


def test_unsupported_image_format(tmp_path):
    Image.new("RGB", (4, 4)).save(tmp_path / "a.bmp", format="BMP")
    (tmp_path / "b.png").write_bytes(b"garbage")
    with pytest.raises(DataError, match="unsupported image format BMP"):
        preprocess(tmp_path / "a.bmp", 4)
    with pytest.raises(DataError, match="cannot decode"):
        preprocess(tmp_path / "b.png", 4)


@pytest.fixture
def picture(rng):
    return Image.fromarray(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8))


def test_flip_is_an_involution(picture):
    aug = AugmentationConfig(1.0, 0.0, 0.0, 0.0)
    twice = augment(augment(picture, aug, sample_rng(0, 0, 0)), aug, sample_rng(0, 0, 1))
    assert np.array_equal(np.asarray(twice), np.asarray(picture))
    once = augment(picture, aug, sample_rng(0, 0, 0))
    assert np.array_equal(np.asarray(once), np.asarray(picture)[:, ::-1])


def test_disabled_augmentation_is_identity(picture):
    out = augment(picture, AugmentationConfig.disabled(), sample_rng(3, 1, 4))
    assert np.array_equal(np.asarray(out), np.asarray(picture))


def test_grayscale_and_posterize(picture):
    gray = augment(picture, AugmentationConfig(0.0, 0.0, 1.0, 0.0), sample_rng(0, 0, 0))
    gray = np.asarray(gray)
    assert np.array_equal(gray[..., 0], gray[..., 1])
    assert np.array_equal(gray[..., 1], gray[..., 2])

    poster = np.asarray(
        augment(picture, AugmentationConfig(0.0, 0.0, 0.0, 1.0, 2), sample_rng(0, 0, 0))
    )
    assert np.all(poster % 64 == 0)


def test_rotation_keeps_size_and_fill(picture):
    aug = AugmentationConfig(0.0, 15.0, 0.0, 0.0)
    out = augment(picture, aug, sample_rng(0, 0, 0), fill=(1, 2, 3))
    assert out.size == picture.size


def test_sample_stream_is_reproducible(picture):
    aug = AugmentationConfig()
    a = augment(picture, aug, sample_rng(5, 2, 7))
    b = augment(picture, aug, sample_rng(5, 2, 7))
    assert np.array_equal(np.asarray(a), np.asarray(b))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(horizontal_flip_p=1.5),
        dict(grayscale_p=-0.1),
        dict(rotation_max_deg=-1.0),
        dict(posterize_bits=9),
    ],
)
def test_invalid_augmentation(kwargs):
    with pytest.raises(ConfigError):
        AugmentationConfig(**kwargs)


def test_preprocess_scales_and_standardizes(picture):
    raw = preprocess(picture, 12)
    assert raw.shape == (3, 12, 12)
    assert np.allclose(raw, np.asarray(picture).transpose(2, 0, 1) / 255.0)

    stats = DatasetStats((0.5, 0.4, 0.3), (0.2, 0.25, 0.5))
    standardized = preprocess(picture, 12, stats=stats)
    mean = np.array(stats.mean)[:, None, None]
    std = np.array(stats.std)[:, None, None]
    assert np.allclose(standardized, (raw - mean) / std)


def test_preprocess_resizes_and_needs_rng(picture):
    assert preprocess(picture, 6).shape == (3, 6, 6)
    with pytest.raises(ValueError):
        preprocess(picture, 6, aug=AugmentationConfig())


def test_augmented_batches_are_finite(shapes):
    loader = BatchLoader(shapes[0], 8, 32, seed=1, augmentation=AugmentationConfig())
    for x, y in loader:
        assert x.shape[1:] == (3, 32, 32)
        assert np.all(np.isfinite(x.data))
        assert y.dtype == np.int64


def test_epoch_order():
    assert epoch_order(5, 0, 0, shuffle=False).tolist() == [0, 1, 2, 3, 4]
    order = epoch_order(50, 3, 1)
    assert sorted(order.tolist()) == list(range(50))
    assert np.array_equal(order, epoch_order(50, 3, 1))
    assert not np.array_equal(order, epoch_order(50, 3, 2))


def test_loader_batches(shapes):
    loader = BatchLoader(shapes[0], 10, 16, shuffle=False)
    batches = list(loader)
    assert len(loader) == len(batches) == 3
    assert [len(y) for _, y in batches] == [10, 10, 4]
    assert batches[0][0].dtype == np.float32
    assert np.concatenate([y for _, y in batches]).tolist() == shapes[0].labels.tolist()


@pytest.mark.parametrize("workers", [0, 1, 4])
def test_loader_does_not_depend_on_workers(shapes, workers):
    def loader(workers):
        return BatchLoader(
            shapes[0],
            5,
            16,
            seed=2,
            epoch=3,
            augmentation=AugmentationConfig(),
            workers=workers,
            prefetch=1,
        )

    reference = loader(0)
    for (x, y), (rx, ry) in zip(loader(workers), reference):
        assert np.array_equal(x.data, rx.data)
        assert np.array_equal(y, ry)


def test_loader_rejects_bad_batch_size(shapes):
    with pytest.raises(ConfigError):
        BatchLoader(shapes[0], 0, 16)


def test_sidecar_round_trip(tmp_path):
    info = DatasetInfo(["a", "b"], DatasetStats((0.1, 0.2, 0.3), (1.0, 1.0, 1.0)))
    write_sidecar(tmp_path, info)
    assert read_sidecar(tmp_path) == info
    assert schema.loads((tmp_path / "dataset.json").read_text())["class_names"] == ["a", "b"]
