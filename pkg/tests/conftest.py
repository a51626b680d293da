import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_results: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    title = m.group(2).replace("_", " ")
    if report.failed:
        _results[n] = ("FAIL", title)
    elif report.when == "call" and n not in _results:
        _results[n] = ("PASS" if report.passed else "SKIP", title)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status, title = _results[n]
        terminalreporter.write_line(f"{status}  criterion {n:2d}: {title}")
