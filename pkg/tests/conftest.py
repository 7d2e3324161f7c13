"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS: dict[str, bool] = {}
_DETAILS: dict[str, str] = {}


@pytest.fixture
def detail(request):
    """``detail(text)`` attaches a measurement to the test's criterion line."""
    cid = request.node.get_closest_marker("criterion").args[0]

    def note(text: str):
        _DETAILS[cid] = text

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid = mark.args[0]
    if rep.when == "call" or rep.failed:
        _RESULTS[cid] = _RESULTS.get(cid, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS):
        status = "PASS" if _RESULTS[cid] else "FAIL"
        terminalreporter.write_line(f"{cid} {status}  {_DETAILS.get(cid, '')}".rstrip())
