"""Per-criterion reporting for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n, "title")`` are grouped by ``n``;
the terminal summary prints one PASS/FAIL line per criterion.  A criterion
passes only if every test tagged with it passed.
"""

from __future__ import annotations

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        n, title = mark.args
        entry = _CRITERIA.setdefault(n, {"title": title, "nodes": set(), "failed": [], "seen": set()})
        entry["nodes"].add(item.nodeid)


def pytest_runtest_logreport(report):
    for entry in _CRITERIA.values():
        if report.nodeid not in entry["nodes"]:
            continue
        if report.when == "call" or report.outcome != "passed":
            entry["seen"].add(report.nodeid)
        if report.outcome != "passed":
            entry["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        if not entry["seen"]:
            status = "NOT RUN"
        elif entry["failed"]:
            status = "FAIL"
        elif entry["seen"] != entry["nodes"]:
            status = "PARTIAL"
        else:
            status = "PASS"
        detail = f" ({', '.join(sorted(set(entry['failed'])))})" if entry["failed"] else ""
        tr.write_line(f"criterion {n:>2}: {status:<7} {entry['title']}{detail}")
