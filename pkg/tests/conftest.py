import hypothesis
import numpy as np
import pytest

from tests.helpers import params_ghz

hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("ci")

@pytest.fixture
def fig2a():
    return params_ghz(delta1=2.0, delta2=0.0, J=0.5)


@pytest.fixture
def fig2b():
    return params_ghz(delta1=4.0, delta2=4.0, J=3.0)


@pytest.fixture
def fig2c():
    return params_ghz(delta1=4.6, delta2=4.6, J=3.0)


@pytest.fixture
def fig3():
    return params_ghz(J=4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20181014)


_CRITERIA: dict[int, list[bool]] = {}
_TITLES: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    _TITLES[n] = title
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        verdict = "PASS" if all(_CRITERIA[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({_TITLES[n]}): {verdict}")
