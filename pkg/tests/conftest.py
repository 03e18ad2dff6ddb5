import numpy as np
import pytest

from rashomon_al.dataset import BinaryDataset


@pytest.fixture
def xor_data() -> BinaryDataset:
    return BinaryDataset(
        features=np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8),
        labels=np.array([0, 1, 1, 0]),
        feature_names=("f0", "f1"),
        n_classes=2,
    )


def random_dataset(rng: np.random.Generator, n_rows: int, n_features: int, n_classes: int = 2) -> BinaryDataset:
    return BinaryDataset(
        features=rng.integers(0, 2, size=(n_rows, n_features)).astype(np.uint8),
        labels=rng.integers(0, n_classes, size=n_rows),
        feature_names=tuple(f"f{i}" for i in range(n_features)),
        n_classes=n_classes,
    )
