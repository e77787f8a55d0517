import re

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    match = re.search(r"test_(\d\d)_(\w+?)(\[|$)", report.nodeid)
    if not match:
        return
    key = (match.group(1), match.group(2).replace("_", " "))
    failed = report.failed  # setup, call or teardown
    if report.when == "call" or failed:
        _acceptance[key] = _acceptance.get(key, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(_acceptance.items()):
        terminalreporter.write_line(f"criterion {int(number):2d} {'PASS' if ok else 'FAIL'}  {title}")
