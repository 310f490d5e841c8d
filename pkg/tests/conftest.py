import os

import pytest
from hypothesis import HealthCheck, settings

from ellqg.theta import sample_generic_params

settings.register_profile(
    "ellqg",
    max_examples=int(os.environ.get("ELLQG_HYPOTHESIS_EXAMPLES", "25")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ellqg")

# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{num:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")


@pytest.fixture
def params3():
    return sample_generic_params(3, k_max=3, seed=11)


@pytest.fixture
def params2():
    return sample_generic_params(2, k_max=2, seed=5)
