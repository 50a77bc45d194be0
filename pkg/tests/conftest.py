import functools

import numpy as np
import pytest

from hyperdiscovery.datagen import GenerationConfig, generate

_CRITERIA = {}


@functools.lru_cache(maxsize=None)
def benchmark_dataset(model, sigma=0.0, seed=0):
    """``(mesh, partition, clean, noisy)`` on the default desk mesh, generated once per session."""
    return generate(model, GenerationConfig(sigma=sigma, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    n = marker.args[0]
    ok = rep.passed if rep.when == "call" else False
    prev = _CRITERIA.get(n, (True, []))
    _CRITERIA[n] = (prev[0] and ok, prev[1] + [item.name])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, names = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({', '.join(names)})")
