"""Collects the outcome of every ``acceptance``-marked test and prints one
PASS/FAIL line per criterion at the end of the run."""
import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


def pytest_runtest_logreport(report):
    mark = getattr(report, "_acceptance", None)
    if mark is None:
        return
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        prev = _results.get(mark[0])
        if prev is None or prev[1] == "PASS":
            _results[mark[0]] = (mark[1], "PASS" if report.passed else "FAIL", detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # stash the marker on the report so the logreport hook can see it
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        outcome.get_result()._acceptance = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        title, verdict, detail = _results[n]
        line = f"{verdict} {n:2d} {title}"
        terminalreporter.write_line(line + (f" | {detail}" if detail else ""))
