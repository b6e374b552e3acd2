import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_acceptance: dict[str, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or "label" not in marker.kwargs:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _acceptance.setdefault(marker.kwargs["label"], []).append((report.passed, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance")
    for label, runs in _acceptance.items():
        status = "PASS" if all(ok for ok, _ in runs) else "FAIL"
        seconds = sum(d for _, d in runs)
        terminalreporter.write_line(f"{status}  {label}  ({len(runs)} case(s), {seconds:.2f}s)")
