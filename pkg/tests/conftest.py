import numpy as np
import pytest
from hypothesis import settings
from scipy.io import wavfile

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture
def write_wav(tmp_path):
    """Write raw sample data (any scipy-supported dtype/shape) and return the path."""
    counter = iter(range(10_000))

    def _write(data, rate=16000, name=None):
        path = tmp_path / (name or f"clip{next(counter)}.wav")
        wavfile.write(path, rate, np.asarray(data))
        return path

    return _write


_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    doc = getattr(report, "criterion", None)
    if doc:
        _criteria[report.nodeid] = (doc, report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker:
        report.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome in sorted(_criteria.values()):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {doc}")
