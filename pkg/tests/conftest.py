"""Shared pytest wiring.

Tests marked ``@pytest.mark.acceptance("AC<k>", "<summary>")`` are collected
into a registry; the terminal summary prints one PASS/FAIL line for each.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(key, summary): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key, summary = marker.args
    entry = _RESULTS.setdefault(key, {"summary": summary, "passed": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda k: int(k.lstrip("AC"))):
        entry = _RESULTS[key]
        status = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"{status} {key}: {entry['summary']}")
