from pathlib import Path

import pytest

from heegner_aj.isogeny import level_structure_from_t
from heegner_aj.modforms import parse_newform
from heegner_aj.numerics import PrecisionContext
from heegner_aj.quadfield import ImagQuadField

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "5.4.a.a.json"


@pytest.fixture(scope="session")
def fixture_path():
    return FIXTURE


@pytest.fixture(scope="session")
def newform():
    return parse_newform(FIXTURE)


@pytest.fixture(scope="session")
def K11():
    return ImagQuadField(11)


@pytest.fixture(scope="session")
def ls11():
    return level_structure_from_t(1, 1, 5)


@pytest.fixture
def ctx():
    return PrecisionContext(128)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one 'CRITERION n PASS|FAIL ...' line per acceptance criterion."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter):
    lines = terminalreporter.config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
