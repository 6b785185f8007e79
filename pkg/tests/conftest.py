import pytest
from hypothesis import HealthCheck, settings

from kurepa import make_family, parse_ordinal

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# lines recorded by the acceptance suite, echoed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])


def o(text: str):
    return parse_ordinal(text)


@pytest.fixture(scope="session")
def f1():
    return make_family("f1")


@pytest.fixture(scope="session")
def f2():
    return make_family("f2")


@pytest.fixture(scope="session")
def f3():
    return make_family("f3")


@pytest.fixture(scope="session")
def f3_wide():
    return make_family("f3", o("w^3"), o("w^6"))
