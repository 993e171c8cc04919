import pytest
from hypothesis import settings

from memsdelay.model import SqueezeFilm
from memsdelay.statics import equilibria

from .reference import ACCEPTANCE_LINES, DELTA, E, GAMMA, V0, table2_params

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

@pytest.fixture
def p2():
    return table2_params()


@pytest.fixture
def forced():
    return table2_params(delta=DELTA)


@pytest.fixture
def squeeze():
    return table2_params(damping=SqueezeFilm(GAMMA))


@pytest.fixture(scope="session")
def eq2():
    return equilibria(E, V0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
