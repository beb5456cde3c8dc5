import pytest

from segvsa import Hypervector, RngStream, SpaceConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def space():
    return SpaceConfig()


@pytest.fixture
def tiny():
    """N=16, d=4: the hand-worked examples."""
    return SpaceConfig(16, 4)


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def worked(tiny):
    return {
        "C": Hypervector(tiny, (2, 0, 3, 3)),
        "D": Hypervector(tiny, (2, 1, 3, 1)),
        "E": Hypervector(tiny, (3, 1, 0, 2)),
        "P": Hypervector(tiny, (1, 3, 2, 0)),
    }


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
