import pytest

from qgabor.field import GridSpec

_CRITERIA = {}


@pytest.fixture(scope="session")
def spec():
    """Desk-scale grid: [-8, 8)^2 at 16 samples per unit (256^2)."""
    return GridSpec.square(8.0, 16)


@pytest.fixture(scope="session")
def small_spec():
    return GridSpec.square(4.0, 8)


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _CRITERIA[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        status = "PASS" if _CRITERIA[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
