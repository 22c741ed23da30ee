"""Acceptance reporting: one pass/fail line per ``criterion``-marked test."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, label = mark.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    prev = _RESULTS.get(number)
    if rep.when == "call" or failed:
        details = ", ".join(f"{k}={v}" for k, v in item.user_properties)
        _RESULTS[number] = (label, "FAIL" if failed or (prev and prev[1] == "FAIL") else "PASS", details)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        label, status, details = _RESULTS[number]
        line = f"criterion {number:2d} {status}  {label}"
        terminalreporter.write_line(line + (f"  [{details}]" if details else ""))
