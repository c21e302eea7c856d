import functools

import pytest

from rfkahler.algebra import build_model
from rfkahler.registry import RadialParams, lookup_space


@functools.lru_cache(maxsize=None)
def model_for(family: str, n: int):
    return build_model(lookup_space(family, n))


@pytest.fixture
def cp2():
    return model_for("cpn", 2)


CASE1_PARAMS = [
    RadialParams(1.0, 0.0, 0.0),
    RadialParams(0.5, 0.0, 0.0),
    RadialParams(2.0, 0.0, 0.0),
    RadialParams(1.0, 0.5, 0.0),
    RadialParams(2.0, 3.0, 0.0),
]
CP_PARAMS = [
    RadialParams(1.0, 0.0, 0.0),
    RadialParams(1.0, 0.0, 0.5),
    RadialParams(0.5, 0.0, -0.5),
    RadialParams(2.0, 0.0, 2.0),
    RadialParams(1.0, 0.5, 2.0),
]


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k)):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
