import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stkde.domain import GridSpec2D, LandUse, LandUseGrid

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_landuse():
    spec = GridSpec2D(0.0, 0.0, 100.0, 6, 5)
    classes = np.full(spec.shape, LandUse.ELIGIBLE, dtype=np.int8)
    classes[0, :] = LandUse.OUTSIDE
    classes[1, 0] = LandUse.IN_STUDY_NON_ELIGIBLE
    return LandUseGrid(spec, classes)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
