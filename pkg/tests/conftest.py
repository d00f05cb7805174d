import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("fracspl", deadline=None, derandomize=True)
settings.load_profile("fracspl")

from fracspl.params import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def reference_params():
    return ModelParams(alpha=0.5, tau_q_alpha=0.5, rho=1.0, c=1.0, a=1.0)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
