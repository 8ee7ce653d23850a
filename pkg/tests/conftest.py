import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    if call.when == "setup" and call.excinfo is None:
        return
    n, title = mark.args
    if call.excinfo is None:
        status = "PASS"
    elif call.excinfo.errisinstance(__import__("pytest").skip.Exception):
        status = "SKIP"
    else:
        status = "FAIL"
    detail = getattr(item, "criterion_detail", "")
    _criteria[n] = f"criterion {n:2d} {status}  {title}" + (f"  [{detail}]" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_criteria):
            terminalreporter.write_line(_criteria[n])
