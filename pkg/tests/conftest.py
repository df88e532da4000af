"""Shared fixtures and the acceptance summary hook.

Acceptance tests register one line per criterion via `record_criterion`;
the terminal summary prints them as a block so a full `pytest` run ends
with an at-a-glance pass/fail table.
"""

from __future__ import annotations

_ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE_LINES.append((number, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    tw = terminalreporter
    tw.section("ACCEPTANCE SUMMARY")
    for number, ok, detail in sorted(_ACCEPTANCE_LINES):
        verdict = "PASS" if ok else "FAIL"
        tw.write_line(f"criterion {number:2d}: {verdict}  {detail}")
