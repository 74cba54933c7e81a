import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evtest.empirical import EmpiricalCopula  # noqa: E402

_ACCEPTANCE = []


@pytest.fixture
def toy():
    """n = 2, d = 2 sample with pseudo-observations (1/3, 1/3) and (2/3, 2/3)."""
    return EmpiricalCopula.from_array(np.array([[1.0, 1.0], [2.0, 2.0]]) / 3.0)


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
