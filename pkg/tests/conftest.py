import numpy as np
import pytest

from mmafdm.codec import SystemParams
from mmafdm.modes import build_modes


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_system():
    return SystemParams(N=4, G=1, M=4, k=2, U=2), build_modes("QAM", 4, 2)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
