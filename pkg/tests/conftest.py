import numpy as np
import pytest
from hypothesis import settings

from sgim_acts.core import Config

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def cfg() -> Config:
    return Config()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)


@pytest.fixture
def small_cfg() -> Config:
    """A budget small enough for end-to-end runs inside unit tests."""
    return Config(total_actions=300, eval_period=100, teacher1_actions=300, n_seeds=2)


def _criterion(nodeid: str) -> int | None:
    name = nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" in nodeid and name.startswith("test_criterion_"):
        return int(name.split("_")[2])
    return None


def pytest_runtest_logreport(report):
    import acceptance_report

    n = _criterion(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        acceptance_report.OUTCOMES[n] = report.outcome


def pytest_terminal_summary(terminalreporter):
    import acceptance_report

    if not acceptance_report.OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance_report.OUTCOMES):
        verdict = "PASS" if acceptance_report.OUTCOMES[n] == "passed" else "FAIL"
        detail = acceptance_report.DETAILS.get(n, "")
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {detail}")
