import numpy as np
import pytest

from risgroup import SystemParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def defaults():
    """Default scenario: K=360, T_c=900, 0 dBm, d0=51, d=48, dv=2."""
    return SystemParams.from_scenario()


_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, ok, detail)`` then assert ``ok``."""

    def record(name: str, ok: bool, detail: str = ""):
        _CRITERIA.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
