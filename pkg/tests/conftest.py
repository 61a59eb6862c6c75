import functools

import pytest

from pvdmpc.scenario_io import bundled_scenario_path, load_scenario
from pvdmpc.sim import run_scenario

_ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def bundled(name):
    return load_scenario(bundled_scenario_path(name))


@functools.lru_cache(maxsize=None)
def bundled_run(name):
    """Scenario and its log, computed once per session."""
    sc = bundled(name)
    return sc, run_scenario(sc)


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the line is printed at the end of the session."""
    def record(num, ok, detail):
        line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[num] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[num])
