import numpy as np
import pytest

from tubekit import KeyPoint, PointTube
from tubekit import rng as tkrng


@pytest.fixture
def make_gen():
    def _make(seed: int = 0) -> np.random.Generator:
        return tkrng.stream(seed, 0xE57)

    return _make


@pytest.fixture
def make_tube(make_gen):
    def _make(seed: int = 0, l: int = 3, n: int = 32, spread: float = 0.5) -> PointTube:
        gen = make_gen(seed)
        local = gen.uniform(-spread, spread, size=(l, n, 3))
        return PointTube(
            key_point=KeyPoint(np.zeros(3), l // 2),
            local_points=local,
            source_indices=np.zeros((l, n), dtype=np.int64),
            radius=2.0 * spread,
        )

    return _make
