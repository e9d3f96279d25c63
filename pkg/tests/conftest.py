import pytest

from irgraph.model import LambdaOverN, ModelSpec, validate

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """record(criterion, ok, detail) stores one acceptance verdict for the summary."""
    def _record(criterion: int, ok: bool, detail: str = ""):
        _ACCEPTANCE[criterion] = (bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def er2():
    return validate(ModelSpec.make([1.0], [[1.0]], LambdaOverN(2.0)))


@pytest.fixture
def two_type():
    return validate(ModelSpec.make([0.5, 0.5], [[2.0, 1.0], [1.0, 2.0]], LambdaOverN(2.0)))
