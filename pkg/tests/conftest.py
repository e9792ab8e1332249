import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "codec", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("codec")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def worked_values():
    """The worked run-length example: L=7, five blocks."""
    return [20] + [0] * 6 + [0] * 4 + [16, 0, 0] + [0] * 7 + [-15] + [0] * 6 + [0] * 7


# -- acceptance report -------------------------------------------------------
# Each acceptance test records exactly one PASS/FAIL line; the lines are
# printed together at the end of the run.

_ACCEPTANCE_LINES: list[str] = []


class CriterionRecorder:
    def __init__(self, name):
        self.name = name
        self.line = None

    def record(self, ok: bool, detail: str, gating: bool = True):
        tag = "PASS" if ok else "FAIL"
        suffix = "" if gating else " (non-gating)"
        self.line = f"{tag}  {self.name}{suffix}: {detail}"
        print(self.line)
        return ok


@pytest.fixture
def criterion(request):
    rec = CriterionRecorder(request.node.get_closest_marker("criterion").args[0])
    yield rec
    _ACCEPTANCE_LINES.append(rec.line or f"FAIL  {rec.name}: raised before a verdict was recorded")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
