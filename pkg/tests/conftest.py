import pytest

from dirtail.distributions import DistributionSpec


@pytest.fixture(scope="session")
def rademacher():
    return DistributionSpec.rademacher()


@pytest.fixture(scope="session")
def uniform():
    return DistributionSpec.poly_edge(1.0, 1.0)


@pytest.fixture(scope="session")
def poly2():
    return DistributionSpec.poly_edge(1.0, 2.0)


@pytest.fixture(scope="session")
def gaussian():
    return DistributionSpec.gaussian_sanity()


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
