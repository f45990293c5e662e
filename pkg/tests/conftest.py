"""Shared fixtures.

Runs are cached for the whole session on their configuration (label
ignored), so a sweep point that coincides with a shipped scenario is only
simulated once.
"""

import time

import pytest

from vibheom import load_scenario, simulate
from vibheom.config import serialize_config

_RUNS = {}


def cached_run(cfg):
    key = serialize_config(cfg.replace(label="run"))
    if key not in _RUNS:
        start = time.perf_counter()
        res = simulate(cfg, keep_states=True)
        res.elapsed = time.perf_counter() - start
        _RUNS[key] = res
    return _RUNS[key]


@pytest.fixture(scope="session")
def run_config():
    return cached_run


@pytest.fixture(scope="session")
def run_scenario():
    return lambda name: cached_run(load_scenario(name))
