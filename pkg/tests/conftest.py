import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    from synthamp.mathkit import RngStream

    return RngStream(12345)


def pytest_configure(config):
    np.seterr(over="warn")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        ok, detail, _ = mod.RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
