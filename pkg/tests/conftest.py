import os
import sys

import pytest

# make oracles.py importable from every test module
sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(name): marks a test as one verdict line in the acceptance summary",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        prior = _ACCEPTANCE_RESULTS.get(name)
        if prior is None or prior[0] == "PASS":
            _ACCEPTANCE_RESULTS[name] = (verdict, item.nodeid)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    # write_line() prepends a newline while verbose progress state is still
    # open; settle it once here so every row below stays on one line
    tr.ensure_newline()
    tr.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        verdict, _nodeid = _ACCEPTANCE_RESULTS[name]
        markup = {"green": True} if verdict == "PASS" else {"red": True}
        tr.write_line(f"{verdict:4s}  {name}", **markup)
