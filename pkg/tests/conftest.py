import numpy as np
import pytest

import linepin as lp


@pytest.fixture(scope="session")
def emitter_d3():
    return lp.EmitterParams(delta=3.0, gamma=2.0)


@pytest.fixture(scope="session")
def bath_151():
    return lp.discretize_bath(151, 20.0, 2.0)


@pytest.fixture(scope="session")
def bath_21():
    return lp.discretize_bath(21, 10.0, 2.0)


def unit_peak(spectrum):
    return spectrum.intensity / spectrum.intensity.max()


def local_maxima(x, y, floor=0.0):
    """Positions of strict interior local maxima above floor * max(y)."""
    y = np.asarray(y)
    idx = [i for i in range(1, len(y) - 1)
           if y[i] >= y[i - 1] and y[i] > y[i + 1] and y[i] >= floor * y.max()]
    return np.asarray(x)[idx]
