import pytest

from yardsale.model import ModelParams
from yardsale.experiments import TrajectoryConfig
from yardsale.sampling import ConstantFraction

_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with a label and a detail string."""

    def record(label, ok, detail=""):
        _ACCEPTANCE.append((label, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")


@pytest.fixture
def two_agent():
    def make(initial=(0.3, 0.7), beta=0.2, delta=0.0, **kw):
        params = ModelParams(2, delta, ConstantFraction(beta), kw.pop("risk_lambda", None))
        return TrajectoryConfig(params, initial=initial, **kw)

    return make
