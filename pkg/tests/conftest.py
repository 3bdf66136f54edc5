import numpy as np
import pytest

from semsample import PointCloud


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def random_cloud(rng):
    def make(n: int, with_features: bool = False, spread: float = 10.0) -> PointCloud:
        coords = rng.uniform(-spread, spread, size=(n, 3))
        feats = rng.normal(size=(n, 4)) if with_features else None
        return PointCloud(coords, feats)

    return make
