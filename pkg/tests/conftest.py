import numpy as np
import pytest
from hypothesis import settings

from genericdim.measures import BernoulliMeasure, MarkovMeasure

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def markov2():
    """Order-1 chain on {1, 2} with rows (.9, .1) and (.5, .5)."""
    return MarkovMeasure.from_matrix([[0.9, 0.1], [0.5, 0.5]])


@pytest.fixture
def markov3():
    return MarkovMeasure.from_matrix([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])


@pytest.fixture
def fair():
    return BernoulliMeasure([0.5, 0.5])


_ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome, then assert it."""

    def check(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE.append((number, bool(ok), detail))
        assert ok, f"criterion {number}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
