import functools

import numpy as np
import pytest
from hypothesis import settings

from gelfand.continuation import ContinuationOptions, sweep_ray
from gelfand.mesh import build_mesh

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def cached_sweep(N, sigma, n, depth=10):
    """Branch sweeps are reused across test modules; samples keep their pairs."""
    with np.errstate(over="ignore"):
        return sweep_ray(sigma, build_mesh(N, n), depth, ContinuationOptions(), keep_pairs=True)


@pytest.fixture(scope="session")
def sweep_cache():
    return cached_sweep


ACCEPTANCE_LINES = []


@pytest.fixture
def record(capsys):
    """Print and keep one PASS/FAIL line per acceptance criterion."""

    def _record(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
