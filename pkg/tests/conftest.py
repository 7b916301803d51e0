"""Shared, expensive search results (computed once per session, with timings)."""

import time

import pytest

from shrinker_lab.birotational import BiTarget, find_symmetric_closed
from shrinker_lab.csf import find_pinned_parameter
from shrinker_lab.rotational import find_embedded_torus, find_immersed_sphere


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def immersed_sphere_n2():
    return _timed(find_immersed_sphere, 2)


@pytest.fixture(scope="session")
def embedded_torus_n2():
    return _timed(find_embedded_torus, 2)


@pytest.fixture(scope="session")
def csf_n2():
    return _timed(find_pinned_parameter, 2)


@pytest.fixture(scope="session")
def csf_n3():
    return _timed(find_pinned_parameter, 3)


@pytest.fixture(scope="session")
def bi_targets():
    """All three M = 1 targets and their combined runtime."""
    t0 = time.perf_counter()
    out = {tg: find_symmetric_closed(1, tg) for tg in (BiTarget.EMBEDDED_T3, BiTarget.IMMERSED_T3, BiTarget.IMMERSED_S3)}
    return out, time.perf_counter() - t0


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
