import sys

import pytest

from planarstat.geometry import PAIR_S, PAIR_T, build_solid, mask_of
from planarstat.planes import enumerate_planes
from planarstat.stats import StatEngine


@pytest.fixture(scope="session")
def dodeca():
    return build_solid("dodecahedron")


@pytest.fixture(scope="session")
def dodeca_planes(dodeca):
    return enumerate_planes(dodeca)


@pytest.fixture(scope="session")
def engine(dodeca, dodeca_planes):
    return StatEngine(dodeca, dodeca_planes)


@pytest.fixture(scope="session")
def S():
    return mask_of(PAIR_S)


@pytest.fixture(scope="session")
def T():
    return mask_of(PAIR_T)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
