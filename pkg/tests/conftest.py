import numpy as np
import pytest

from pauliest import kernels

_CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.fixture(params=kernels.available_backends())
def kernel_backend(request):
    with kernels.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in getattr(report, "user_properties", []):
        if mark[0] == "criterion":
            num, title = mark[1]
            outcome = "PASS" if report.passed else "FAIL"
            prev = _CRITERIA.get(num)
            if prev is None or prev[1] == "PASS":
                _CRITERIA[num] = (title, outcome)


@pytest.fixture
def criterion(record_property):
    def mark(num: int, title: str):
        record_property("criterion", (num, title))
    return mark


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcome = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} {outcome}  {title}")
