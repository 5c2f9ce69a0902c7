import functools

import pytest

from gtep_bd.backend import get_backend
from gtep_bd.cases import toy_case
from gtep_bd.oracle import solve_monolithic

# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def cached_toy(name):
    return toy_case(name)


@functools.lru_cache(maxsize=None)
def cached_oracle(name, mode="dcopf_bigm", integer=True):
    return solve_monolithic(cached_toy(name), mode, integer=integer, rel_gap=1e-7)


@pytest.fixture(scope="session")
def backend():
    return get_backend("highs")


@pytest.fixture
def three_bus():
    return cached_toy("three_bus")


@pytest.fixture
def six_bus():
    return cached_toy("six_bus")
