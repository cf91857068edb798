import math

import pytest

from btspec.geometry import preset_domain


@pytest.fixture(scope="session")
def disk():
    return preset_domain("disk")


@pytest.fixture(scope="session")
def ellipse():
    return preset_domain("ellipse")


@pytest.fixture
def rad():
    return math.pi
