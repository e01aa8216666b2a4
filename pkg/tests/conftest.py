import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

_acceptance: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    entry = _acceptance.setdefault(number, {"title": title, "passed": True, "details": []})
    if report.failed:
        entry["passed"] = False
    for key, value in item.user_properties:
        if key == "measured" and report.when == "call":
            entry["details"].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        e = _acceptance[number]
        detail = "; ".join(e["details"])
        status = "PASS" if e["passed"] else "FAIL"
        line = f"criterion {number:>2} {status}  {e['title']}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
