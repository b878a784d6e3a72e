from __future__ import annotations

import pytest

# nodeid -> criterion label, and label -> list of outcomes
_LABELS: dict = {}
_OUTCOMES: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None and mark.args:
            _LABELS[item.nodeid] = mark.args[0]


@pytest.hookimpl(trylast=True)
def pytest_runtest_logreport(report):
    label = _LABELS.get(report.nodeid)
    if label is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES.setdefault(label, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_OUTCOMES):
        results = _OUTCOMES[label]
        if any(r == "failed" for r in results):
            verdict = "FAIL"
        elif all(r == "passed" for r in results):
            verdict = "PASS"
        else:
            verdict = "SKIP"
        terminalreporter.write_line(f"{verdict}  {label}")
