import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel(a, b):
    """Relative difference with a guard for exact zeros."""
    a, b = complex(a), complex(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


ACCEPTANCE_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> str:
    """Register one acceptance line; printed again in the terminal summary."""
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
