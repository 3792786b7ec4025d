import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", deadline=None, max_examples=50)
hypothesis.settings.load_profile("default")

MNIST_FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    """Directory holding the four MNIST IDX files, else skip (supplied locally)."""
    root = os.environ.get("ARFF_DATA_DIR", "data/mnist")
    path = Path(root)
    if not all((path / name).is_file() for name in MNIST_FILES):
        pytest.skip(
            f"MNIST IDX files not found under {path}; set ARFF_DATA_DIR "
            "(see scripts/fetch_mnist.py)"
        )
    return path
