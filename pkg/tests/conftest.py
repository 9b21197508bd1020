import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion number and short label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    n, label = marker.args
    _RESULTS[n] = (label, rep.passed, round(rep.duration, 2))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        label, passed, secs = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n} {'PASS' if passed else 'FAIL'}  {label}  ({secs} s)")
