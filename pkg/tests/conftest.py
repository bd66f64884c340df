import os
import time

import pytest
from hypothesis import HealthCheck, settings

from psworkbench.dynamics import conservativity_report
from psworkbench.groups import get_preset

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


_BALLS: dict = {}
BUILD_SECONDS: dict = {}
REPORT_SECONDS: dict = {}


def cached_ball(name: str, radius: float | None = None):
    """Preset balls shared across the session; the radius-14 modular ball takes ~35 s."""
    preset = get_preset(name)
    key = (name, preset.default_radius if radius is None else radius)
    if key not in _BALLS:
        t0 = time.perf_counter()
        _BALLS[key] = preset.ball(key[1])
        BUILD_SECONDS[key] = time.perf_counter() - t0
    return _BALLS[key]


@pytest.fixture(scope="session")
def modular_ball():
    return cached_ball("modular", 14.0)


@pytest.fixture(scope="session")
def schottky_ball():
    return cached_ball("schottky_perp", 14.0)


@pytest.fixture(scope="session")
def cyclic_ball():
    return cached_ball("cyclic_axial", 30.0)


@pytest.fixture(scope="session")
def parabolic_ball():
    return cached_ball("cyclic_parabolic", 16.0)


_REPORTS: dict = {}


def cached_report(name: str, radius: float | None = None, seed: int = 0):
    """Default-knob conservativity reports shared by the dynamics and acceptance tests."""
    preset = get_preset(name)
    key = (name, preset.default_radius if radius is None else radius, seed)
    if key not in _REPORTS:
        ball = cached_ball(name, key[1])
        t0 = time.perf_counter()
        _REPORTS[key] = conservativity_report(preset, key[1], seed=seed, ball=ball)
        REPORT_SECONDS[key] = time.perf_counter() - t0
    return _REPORTS[key]
