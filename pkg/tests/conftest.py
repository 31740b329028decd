import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


JOBS = int(os.environ.get("ENTROCONE_TEST_JOBS", "1"))


@pytest.fixture(scope="session")
def cma_campaign():
    """Twenty CMA-ES restarts on six qubits, full instance set."""
    from entrocone.ensemble_stats import run_restarts
    from entrocone.opt_search import OptimizerConfig

    return run_restarts(6, 20, OptimizerConfig(method="cma_es"), seed=101, jobs=JOBS)


@pytest.fixture(scope="session")
def cobyla_campaign():
    """Twenty COBYLA restarts; the target only shortens runs that already sit on the plateau."""
    from entrocone.ensemble_stats import run_restarts
    from entrocone.opt_search import OptimizerConfig

    cfg = OptimizerConfig(method="cobyla", max_evals=25_000, target_violation=0.1699)
    return run_restarts(6, 20, cfg, seed=202, jobs=JOBS)


@pytest.fixture(scope="session")
def violator_ensemble():
    """One hundred CMA-ES runs stopped once the gap reaches -0.165."""
    from entrocone.ensemble_stats import collect_violators

    return collect_violators(6, 100, target=0.165, seed=303, jobs=JOBS)


# one PASS/FAIL line per acceptance criterion in the terminal summary
_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    num = int(name.split("_")[2])
    if report.when == "call" or report.outcome != "passed":
        if report.skipped and hasattr(report, "wasxfail"):
            state = "FAIL (expected)"
        elif report.passed:
            state = "PASS"
        elif report.skipped:
            state = "SKIP"
        else:
            state = "FAIL"
        # a parametrized criterion passes only if every case passes
        rank = ["PASS", "SKIP", "FAIL (expected)", "FAIL"]
        prev = _CRITERIA.get(num, "PASS")
        _CRITERIA[num] = max(prev, state, key=rank.index)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {num:2d}: {_CRITERIA[num]}")
