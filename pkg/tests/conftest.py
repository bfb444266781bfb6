import numpy as np
import pytest

from qflow.config import load_catalog_config


@pytest.fixture(scope="session")
def catalog_runs():
    """Lazily evolved catalog scenarios, shared across the whole suite."""
    cache = {}

    def get(name):
        if name not in cache:
            cfg = load_catalog_config(name)
            cache[name] = (cfg, cfg.run_evolution())
        return cache[name]

    return get


@pytest.fixture(scope="session")
def spreading_run(catalog_runs):
    return catalog_runs("spreading_gaussian")


@pytest.fixture(scope="session")
def two_slit_run(catalog_runs):
    return catalog_runs("two_slit")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def pytest_terminal_summary(terminalreporter):
    """Echo the per-criterion acceptance lines even when capture is on."""
    try:
        from test_acceptance import RESULT_LINES
    except ImportError:
        return
    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
