"""Shared fixtures and the acceptance summary.

Tests tagged ``@pytest.mark.acceptance("name")`` are grouped by criterion;
the terminal summary prints one PASS/FAIL line per criterion.  A strict
xfail inside a criterion is a documented shortfall, so the criterion is
reported as FAIL with the xfail reason.
"""

from __future__ import annotations

import pytest

CRITERIA = [
    "table n=3",
    "table n=4",
    "headline bounds",
    "prelemma re-verification",
    "search dominance",
    "net-content oracle",
    "frostman properties",
    "large-n preset",
    "rounding soundness",
]

_results: dict[str, list[tuple[str, str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): test belongs to an acceptance criterion")
    config.addinivalue_line("markers", "slow: long-running test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            status = "xfailed" if report.skipped else "xpassed"
            detail = report.wasxfail
        else:
            status = report.outcome
            detail = ""
        _results.setdefault(name, []).append((item.name, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name in CRITERIA + sorted(set(_results) - set(CRITERIA)):
        entries = _results.get(name)
        if not entries:
            continue
        bad = [e for e in entries if e[1] != "passed"]
        verdict = "PASS" if not bad else "FAIL"
        line = f"ACCEPTANCE {verdict}: {name} ({len(entries) - len(bad)}/{len(entries)} checks)"
        for test, status, detail in bad:
            line += f"\n    {test}: {status}" + (f" - {detail}" if detail else "")
        tr.write_line(line)
