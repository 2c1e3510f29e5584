import numpy as np
import pytest

from ctpe import RngStream, benchmark_model, fourier_features

RHO = 1.0
SIGMA2 = 0.1


@pytest.fixture(scope="session")
def benchmark():
    return benchmark_model(RHO, SIGMA2)


@pytest.fixture(scope="session")
def fourier():
    return fourier_features()


@pytest.fixture()
def stream():
    return RngStream(12345)


def grid_x(n=1000):
    return np.linspace(-0.5, 0.5, n, endpoint=False)
