import os

import numpy as np
import pytest

from perimc.plantmodel import DelayedRationalPlant, stabilize_plant
from perimc.sigmodel import harmonic_set
from perimc.filtersynth import FilterDesignSpec
from perimc.imcassembly import design_controller

DATA = os.path.join(os.path.dirname(__file__), '..', 'perimc', 'data')

RIG_NUMERATOR = (1.031e6, 4991.0, 1258.0)
RIG_DENOMINATOR = (3.0e9, 3.3e7, 8.4e6, 5.2e4, 5764.0, 4.2, 1.0)


@pytest.fixture(scope='session')
def data_dir():
    return os.path.abspath(DATA)


@pytest.fixture(scope='session')
def rig_plant():
    return stabilize_plant(DelayedRationalPlant(RIG_NUMERATOR,
                                                RIG_DENOMINATOR, 0.2))


@pytest.fixture(scope='session')
def rig_harmonics():
    return harmonic_set(4 * np.pi, 8)


@pytest.fixture(scope='session')
def rig_design(rig_plant, rig_harmonics):
    spec = FilterDesignSpec(rig_harmonics, n_r=5, Q=1000.0, R=1.0)
    return design_controller(spec, rig_plant)


@pytest.fixture(scope='session')
def small_plant():
    return DelayedRationalPlant((1.0,), (1.0, 1.0), 0.1)


@pytest.fixture(scope='session')
def small_harmonics():
    return harmonic_set(2 * np.pi, 2)


@pytest.fixture(scope='session')
def small_design(small_plant, small_harmonics):
    spec = FilterDesignSpec(small_harmonics, n_r=2, Q=100.0, R=1.0)
    return design_controller(spec, small_plant)
