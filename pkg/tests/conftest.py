import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from krzyz.core import make_config

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_config(rng, max_atoms=6, max_mass=4.0, n=None, max_n=8):
    """Random config with N <= max_atoms and total mass <= max_mass."""
    N = int(rng.integers(1, max_atoms + 1))
    t = rng.uniform(0.1, max_mass)
    lam = t * rng.dirichlet(np.ones(N))
    lam = np.maximum(lam, 1e-3)
    th = rng.uniform(0.0, 2 * math.pi, N)
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    return make_config(list(zip(th, lam)), n)


@st.composite
def configs(draw, max_atoms=6, max_mass=4.0, max_n=8):
    N = draw(st.integers(1, max_atoms))
    th = draw(st.lists(st.floats(0.0, 2 * math.pi, exclude_max=True), min_size=N, max_size=N))
    lam = draw(st.lists(st.floats(0.01, 1.0), min_size=N, max_size=N))
    scale = min(1.0, max_mass / sum(lam))
    n = draw(st.integers(1, max_n))
    return make_config([(a, w * scale) for a, w in zip(th, lam)], n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# ---------------------------------------------------------------------------
# one summary line per acceptance criterion

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    failed = rep.failed
    if rep.when == "call" or failed:
        prev = _CRITERIA.get(number, (title, "PASS"))[1]
        status = "FAIL" if failed or prev == "FAIL" else "PASS"
        if rep.skipped:
            status = "SKIP"
        _CRITERIA[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}")
