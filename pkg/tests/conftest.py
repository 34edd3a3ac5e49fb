"""Shared fixtures for the simulator test suites."""

import numpy as np
import pytest

from network import layout_all_photonic_2x2, layout_conventional_2x2
from noise import NoiseModel
from sources import SourceModel


@pytest.fixture
def rng():
    return np.random.default_rng(20190101)


@pytest.fixture
def ideal_noise():
    """Lossless, fully interfering, one pair per source at most."""
    return NoiseModel(efficiency=1.0, include_multi_pair=False)


@pytest.fixture
def all_photonic():
    return layout_all_photonic_2x2()


@pytest.fixture
def conventional():
    return layout_conventional_2x2("both")


@pytest.fixture
def source():
    return SourceModel(p=0.0344)


@pytest.fixture
def run_env(tmp_path, monkeypatch):
    """Point the run log and log file at a temporary directory."""
    monkeypatch.setenv("RUN_LOG_DB_PATH", str(tmp_path / "runs.db"))
    monkeypatch.setenv("LOG_FILE", str(tmp_path / "sim.log"))
    monkeypatch.setenv("WORKERS", "1")
    return tmp_path
