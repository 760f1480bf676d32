import numpy as np
import pytest

from simam_core.data import generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def shapes_root(tmp_path_factory):
    """A tiny seeded synthetic dataset: 4 classes, 6 train and 2 test images each."""
    root = tmp_path_factory.mktemp("shapes")
    generate_synthetic(
        root,
        num_classes=4,
        train_per_class=6,
        test_per_class=2,
        image_size=32,
        seed=7,
    )
    return root


@pytest.fixture(scope="session")
def shapes(shapes_root):
    from simam_core.data import load_splits

    return load_splits(shapes_root)
