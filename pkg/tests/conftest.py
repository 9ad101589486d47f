import pytest

from qps.arithmetic import Frequency
from qps.cocycle import Cocycle, Potential


@pytest.fixture(scope="session")
def golden():
    return Frequency.golden()


@pytest.fixture(scope="session")
def amo3(golden):
    return Cocycle(Potential.amo(3.0), 0j, golden)


@pytest.fixture(scope="session")
def free(golden):
    return Cocycle(Potential.zero(), 0j, golden)


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for result in sorted(RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(result.line())
