"""Shared fixtures plus per-criterion reporting for the acceptance suite."""

from __future__ import annotations

import re

import pytest

# summary line per acceptance criterion, printed at the end of the run
_CRITERION_PATTERN = re.compile(r"test_criterion_(\d+)")
_criterion_outcomes: dict[int, list[bool]] = {}
_criterion_titles: dict[int, str] = {}


def register_criterion(number: int, title: str) -> None:
    _criterion_titles[number] = title


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    match = _CRITERION_PATTERN.search(item.name)
    if match:
        _criterion_outcomes.setdefault(int(match.group(1)), []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_criterion_outcomes):
        verdict = "PASS" if all(_criterion_outcomes[number]) else "FAIL"
        title = _criterion_titles.get(number, "")
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}")
