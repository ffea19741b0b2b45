import numpy as np
import pytest

from richcont.constitutive import VgmMaterial


@pytest.fixture
def unit_material():
    """alpha = 1, n = 2 (m = 1/2): simple enough to check by hand."""
    return VgmMaterial(1.0, 1.0, 2.0, 0.05, 0.4, name="unit")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
