import pytest

from secroute import Channel, make_band_profile
from secroute.harness import ExperimentConfig


@pytest.fixture(scope="session")
def band1024():
    return make_band_profile(1024, 9.0, 15.0)


@pytest.fixture(scope="session")
def band16():
    return make_band_profile(16, 9.0, 15.0)


@pytest.fixture
def default_cfg():
    return ExperimentConfig()


def channel_for(topo, band):
    return Channel(topo, band)


ACCEPTANCE_LINES: list = []


def report(criterion: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
