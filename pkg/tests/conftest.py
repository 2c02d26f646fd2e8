import numpy as np
import pytest
from hypothesis import settings

# first calls pay numba compilation
settings.register_profile("pw", deadline=None, max_examples=60)
settings.load_profile("pw")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance criteria: one PASS/FAIL line each in the terminal summary -------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported by name")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    name = mark.args[0]
    if report.when == "call" or report.failed:
        passed = report.passed and _CRITERIA.get(name, (True, 0.0))[0]
        _CRITERIA[name] = (passed, _CRITERIA.get(name, (True, 0.0))[1] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, (passed, seconds) in _CRITERIA.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  ({seconds:.1f} s)")
