import numpy as np
import pytest

from arcscat.geometry import make_arc
from arcscat.medium import MediumParams


@pytest.fixture
def bench():
    """Benchmark medium at omega = 10."""
    return MediumParams(omega=10.0)


@pytest.fixture(params=["flat_strip", "spiral", "fish"])
def arc(request):
    return make_arc(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number: int, ok: bool, detail: str):
        lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
