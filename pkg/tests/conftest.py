from __future__ import annotations

import pytest

from bubbletower import compute_recurrence, h4, shoot_first_zero, to_unit_disc, unit_h


@pytest.fixture(scope="session")
def table3():
    return compute_recurrence(3.0)


@pytest.fixture(scope="session")
def tower_shot():
    """H4, p = 3, mu = 6: three bubbles at desk scale."""
    return shoot_first_zero(h4(3.0), 6.0)


@pytest.fixture(scope="session")
def tower_unit(tower_shot):
    return to_unit_disc(tower_shot)


@pytest.fixture(scope="session")
def gelfand_shot():
    return shoot_first_zero(unit_h(1.0), 2.0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
