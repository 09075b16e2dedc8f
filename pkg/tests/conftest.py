import numpy as np
import pytest

from bitxsim.chain import default_config
from bitxsim.signal import make_tone

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion with a report line")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, name, outcome in sorted(_ACCEPTANCE, key=lambda r: (int(r[0].split()[0][2:]), r[1])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {label} ({name})")


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def tone_1k(config):
    return make_tone(1000.0, 1.0, config.duration_s, config.sample_rate_hz)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
