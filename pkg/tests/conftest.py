"""Shared fixtures and the acceptance summary printed at the end of a run."""

import numpy as np
import pytest

from ineqforge.corpus import builtin

# closed-form oracles, computed independently of the package and frozen here
SQRT_PI_2 = 1.2533141373155003  # int exp(-2x^2) dx = ||gaussian||_2^2 = ||gaussian'||_2^2


_ACCEPTANCE = []


def record_acceptance(number, name, passed, detail):
    _ACCEPTANCE.append((number, name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {name}: {detail}")


@pytest.fixture(scope="session")
def gaussian():
    return builtin("gaussian", 1)


@pytest.fixture(scope="session")
def tent():
    return builtin("tent", 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
