import numpy as np
import pytest

from dicke_stirap import DriveParams


@pytest.fixture
def benchmark_params():
    """Reverse-order Gaussian pair with decay used for the N=5, m=2 benchmark."""
    return DriveParams(omega0=50.0, tau=-0.6, delta=0.0, gamma=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
