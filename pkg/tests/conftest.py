"""Shared pytest hooks: prints one line per acceptance criterion."""

from __future__ import annotations

import re


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    import helpers

    num = int(m.group(1))
    if num not in helpers.ACCEPTANCE_ATTEMPTED:
        helpers.ACCEPTANCE_ATTEMPTED.append(num)
    if report.failed and num not in helpers.ACCEPTANCE:
        helpers.ACCEPTANCE[num] = (
            helpers.CRITERIA_LABELS[num],
            False,
            "test errored before recording a result",
        )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import helpers

    if not helpers.ACCEPTANCE_ATTEMPTED:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(helpers.ACCEPTANCE_ATTEMPTED):
        label, passed, detail = helpers.ACCEPTANCE[num]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num} [{label}]: {verdict}  {detail}")
