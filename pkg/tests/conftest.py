import math

import numpy as np
import pytest

from cobrems import CONSTANTS, superposition_geometry


@pytest.fixture(scope="session")
def cfg200():
    """T = 200 keV, beams 30 degrees apart, in phase."""
    return superposition_geometry(200.0, math.radians(30.0), 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def m_e():
    return CONSTANTS.m_e


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def log(crit: str, ok: bool, detail: str):
        line = f"{crit:<4s} {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (int(s.split()[0].rstrip("ab")), s.split()[0])):
            terminalreporter.write_line(line)
