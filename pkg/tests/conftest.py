import os

import pytest
from hypothesis import HealthCheck, settings

from catbond.contracts import CatBondContract
from catbond.loss_process import ShotNoiseSpec
from catbond.model2 import Model2State
from catbond.rates import CirParams
from catbond.severity import Exponential, LogNormal

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

BASE_CIR = CirParams(r0=0.0204, gamma_r=0.0884, theta_cir=0.0204, sigma=0.0477)

_ACCEPTANCE_LINES: list[str] = []


def base_state(threshold=1e4, maturity=3.0, alpha=0.8, lambda_n=0.5, severity=None, rates=BASE_CIR):
    sev = LogNormal(6.387, 0.153) if severity is None else severity
    return Model2State(ShotNoiseSpec(lambda_n, alpha, sev), CatBondContract(1.0, 0.0, threshold, maturity), rates)


@pytest.fixture
def state():
    return base_state()


@pytest.fixture
def exp_state():
    return base_state(severity=Exponential(1 / 3000), lambda_n=1.0, alpha=0.5)


@pytest.fixture
def acceptance_report():
    """Record one line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
