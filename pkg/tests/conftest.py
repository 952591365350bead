import warnings

import pytest

from cylflow import SupportMarginWarning

import _acceptance


@pytest.fixture(autouse=True)
def _quiet_margin_warnings(request):
    # diffusing data reaches the period boundary in many small runs; tests that
    # care about the warning use pytest.warns, which still sees it
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportMarginWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if not _acceptance.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance.LINES):
        terminalreporter.write_line(_acceptance.LINES[n])
