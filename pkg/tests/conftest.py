import sys

import pytest

from casimir_nems.lifshitz import HalfSpacePair
from casimir_nems.materials import gold, silicon
from casimir_nems.roughness import RoughnessSpec
from casimir_nems.sensor import SensorGeometry, SensorScenario

NM = 1e-9


@pytest.fixture(scope="session")
def si():
    return silicon()


@pytest.fixture(scope="session")
def au():
    return gold()


@pytest.fixture(scope="session")
def si_si(si):
    return HalfSpacePair(si, si)


@pytest.fixture(scope="session")
def si_au(si, au):
    return HalfSpacePair(si, au)


@pytest.fixture(scope="session")
def geometry():
    return SensorGeometry()


@pytest.fixture(scope="session")
def si_si_scenario(geometry, si_si):
    return SensorScenario(geometry, si_si, RoughnessSpec(0.1 * NM, 0.1 * NM), measured_pressure=2979.0)


@pytest.fixture(scope="session")
def si_au_scenario(geometry, si_au):
    return SensorScenario(geometry, si_au, RoughnessSpec(0.1 * NM, 2 * NM), measured_pressure=2979.0)



def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in list(sys.modules.items())
                   if name.rsplit(".", 1)[-1] == "test_acceptance" and hasattr(m, "RESULTS")), None)
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
