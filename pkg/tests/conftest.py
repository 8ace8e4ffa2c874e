"""
Shared fixtures: option isolation and small synthetic datasets.
"""

import numpy as np
import pytest

from mvqc_scope.config import reset_option
from mvqc_scope.core import BinaryImage
from mvqc_scope.synthetic import gen_synthetic


@pytest.fixture(autouse=True)
def _reset_options():
    reset_option()
    yield
    reset_option()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_mask(rng):
    def make(size: int = 512, density: float = 0.3) -> BinaryImage:
        return BinaryImage(mask=rng.random((size, size)) < density)

    return make


@pytest.fixture(scope="session")
def signature_dataset(tmp_path_factory):
    """Six separable subjects: 6 genuine samples and 3 forgeries each."""
    out = tmp_path_factory.mktemp("signatures")
    manifest = gen_synthetic(
        out, n_subjects=6, n_genuine=6, n_imposter=3, seed=7, margin=3.0
    )
    return out, manifest
