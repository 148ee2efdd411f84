"""
Shared fixtures.
"""
import numpy as np
import pytest

from beamsynth.config import RunConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_run_config(monkeypatch, tmp_path):
    """A fast configuration: 8 antennas, short solver schedules, coarse sampling."""
    monkeypatch.chdir(tmp_path)
    return RunConfig(
        budget_seconds=60.0,
        n_antennas=8,
        amp_bits=2,
        objective={"sample_step": 5.0},
        phase_solver={"batch_size": 8, "iterations": 120},
        amplitude_solver={"batch_size": 4, "iterations": 60},
        refine_m=3,
        classical_restarts=1,
        adam={"iterations": 40},
        candidate_cap=16,
        seed=7,
    )
