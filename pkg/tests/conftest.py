import pytest

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    _criteria.append((marker.args[0], report.passed, report.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, duration, detail in _criteria:
        line = f"{'PASS' if ok else 'FAIL'}  {name}  ({duration:.2f} s)"
        if detail:
            line += f"  {detail}"
        terminalreporter.write_line(line)
