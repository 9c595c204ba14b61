import numpy as np
import pytest
from hypothesis import settings

from consensus_kit import kernels

# fixed example stream so every run checks the same cases
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


def random_stochastic(rng, n, density=1.0, positive_diagonal=False):
    mask = rng.random((n, n)) < density
    if positive_diagonal:
        np.fill_diagonal(mask, True)
    empty = ~mask.any(axis=1)
    mask[empty, rng.integers(0, n, size=empty.sum())] = True
    a = rng.random((n, n)) * mask
    return a / a.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _available():
    out = ["python"]
    try:
        kernels.get_backend("cython")
        out.append("cython")
    except ImportError:
        pass
    return out


@pytest.fixture(params=_available())
def backend(request):
    return kernels.get_backend(request.param)
