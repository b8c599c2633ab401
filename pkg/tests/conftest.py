import math

import numpy as np
import pytest

from jtwpa.dispersion import JtwpaDevice, LineParams, ResonatorSpec, comb_resonators

PUMP = 2 * math.pi * 5.97e9
PLASMA = PUMP / math.sqrt(6.7e-3)
TANK = ResonatorSpec(10e-15, 7.0e-12, 100e-12)


def make_line(z0=50.0, i_c=2.75e-6, n_cells=2000):
    return LineParams.from_junctions(n_cells, z0, i_c, PLASMA)


@pytest.fixture(scope="session")
def rpm_device():
    return JtwpaDevice(make_line(), (TANK,))


@pytest.fixture(scope="session")
def plain_device():
    return JtwpaDevice(make_line())


@pytest.fixture(scope="session")
def comb_device():
    return JtwpaDevice(make_line(z0=14.0), (TANK,) + tuple(comb_resonators(TANK, 19, 0.05, 3.0)))


@pytest.fixture(scope="session")
def flat_device():
    return JtwpaDevice(make_line(z0=60.0, i_c=1.75e-6), (TANK,))


@pytest.fixture(scope="session")
def band():
    return 2 * np.pi * np.linspace(4e9, 8e9, 2001)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
