import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pcga.rng import RngStream

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion id -> (passed, one-line detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def record():
    def _record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE[criterion] = (bool(passed), detail)
        return passed

    return _record


def bits(text: str) -> np.ndarray:
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.removeprefix("AC"))):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if passed else 'FAIL'} - {detail}")
