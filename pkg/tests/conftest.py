from pathlib import Path

import numpy as np
import pytest

from accessinfo.core import Ensemble
from accessinfo.measurement import ProjectiveMeasurement

from oracles import BB84_KETS, SQ

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def orthogonal():
    return Ensemble.from_kets([0.5, 0.5], [(1, 0), (0, 1)])


@pytest.fixture
def bb84():
    return Ensemble.from_kets([0.25] * 4, BB84_KETS)


@pytest.fixture
def zero_plus():
    return Ensemble.from_kets([0.5, 0.5], [(1, 0), (SQ, SQ)])


@pytest.fixture
def z_basis():
    return ProjectiveMeasurement.computational(2)


@pytest.fixture
def x_basis():
    return ProjectiveMeasurement.from_basis([(SQ, SQ), (SQ, -SQ)])


@pytest.fixture
def bell():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v)
