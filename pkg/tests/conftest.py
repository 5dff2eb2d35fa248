import pytest

from drugrelease.model import build_eigensystem
from drugrelease.scenarios import SCENARIOS, reference_params

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def reference_systems():
    return {name: build_eigensystem(reference_params(name)) for name in SCENARIOS}


@pytest.fixture(scope="session")
def coated_system(reference_systems):
    return reference_systems["coated_20min"]


@pytest.fixture
def record():
    def _record(criterion, passed, detail):
        ACCEPTANCE[criterion] = (passed, detail)
        print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {key}: {detail}")
