import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qerlab.spectral import ModeSum, shell_points

settings.register_profile("lab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num])


def random_mode_sum(rng, r2, n=2, count=None):
    ks = shell_points(r2, n)
    m = len(ks) if count is None else min(count, len(ks))
    sel = ks[rng.choice(len(ks), size=m, replace=False)]
    cs = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return ModeSum(1.0 / np.sqrt(r2), sel, cs)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
