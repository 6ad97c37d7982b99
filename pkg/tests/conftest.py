from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

# Filled by test_acceptance.py, printed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def natural_dir():
    return DATA / "natural"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
