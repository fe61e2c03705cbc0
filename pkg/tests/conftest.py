import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eyeseg.synthetic import synthetic_labels, write_synthetic_dataset


@pytest.fixture
def eye_labels():
    """One full synthetic eye (all three features present)."""
    return synthetic_labels(seed=123, mode="full")


@pytest.fixture
def synthetic_dataset_root(tmp_path):
    return write_synthetic_dataset(tmp_path / "dataset", count=6, seed=11)
