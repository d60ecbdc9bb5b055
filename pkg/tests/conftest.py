import pytest

from fogcache.model import SystemParams


@pytest.fixture
def ref_params():
    """Parameters of the eviction-policy comparison: M=10, K=5, N=20, mu=0.1, r=0.2."""
    return SystemParams(M=10, K=5, N=20, mu=0.1, r=0.2, p=0.5, alpha=2.0)


@pytest.fixture
def churn_params():
    return SystemParams(M=10, K=5, N=5, mu=0.5, r=1.1, p=0.55)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
