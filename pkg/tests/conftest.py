import functools

import pytest

from spinauto.geometry import LCConnection
from spinauto.scenario import catalog, random_scenario

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def lc_for(name: str, n: int) -> LCConnection:
    scenario = catalog(n)[name] if not name.startswith("random-") else random_scenario(int(name.split("-")[1]), n)
    return LCConnection.from_metric(scenario.metric())


@functools.lru_cache(maxsize=None)
def spinor_for(name: str, n: int):
    scenario = catalog(n)[name] if not name.startswith("random-") else random_scenario(int(name.split("-")[1]), n)
    return scenario.spinor_field()


@pytest.fixture
def acceptance_line():
    def record(criterion: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
