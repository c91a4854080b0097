import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gchlab.spectral import Field, GridSpec

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def grid64():
    return GridSpec(64)


@pytest.fixture
def grid256():
    return GridSpec(256)


def bandlimited(grid, seed, top=None, amplitude=1.0):
    """Random real trigonometric polynomial with modes |j| <= top (default N/8)."""
    rng = np.random.default_rng(seed)
    top = grid.n_points // 8 if top is None else top
    theta = 2 * np.pi * grid.x / grid.length
    v = rng.normal() * 0.3 * np.ones(grid.n_points)
    for j in range(1, top + 1):
        a, b = rng.normal(size=2) / j**2
        v += a * np.cos(j * theta) + b * np.sin(j * theta)
    return Field(grid, amplitude * v / max(1.0, np.max(np.abs(v))))


def cos_field(grid, mode=1, amp=1.0):
    return Field(grid, amp * np.cos(mode * 2 * math.pi * grid.x / grid.length))


# one line per acceptance criterion, appended by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda c: (int(c.split()[0]), c)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
