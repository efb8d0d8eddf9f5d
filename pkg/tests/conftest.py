import numpy as np
import pytest

from higherindex.geom import Euclidean, HyperbolicPlane


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["euclidean", "hyperbolic"])
def model(request):
    return Euclidean(2) if request.param == "euclidean" else HyperbolicPlane()
