import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vlcbo.fixed import QosSpec
from vlcbo.scenario import table2

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sc():
    return table2()


@pytest.fixture(scope="session")
def snap(sc):
    return sc.snapshot()


@pytest.fixture(scope="session")
def qos5(sc):
    return QosSpec.build(5.0, np.deg2rad(30.0), sc.abg, sc.link)
