import numpy as np
import pytest

# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: dict = {}


def record(criterion: int, passed: bool | None, detail: str) -> None:
    """``passed=None`` marks a criterion that could not run."""
    status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
    ACCEPTANCE_RESULTS[criterion] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        status, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:>2}: {status}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
