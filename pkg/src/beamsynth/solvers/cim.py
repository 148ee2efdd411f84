"""
Coherent Ising machine simulations: SimCIM, chaotic amplitude control (CAC) and
chaotic feedback control (CFC).
"""
import logging
from typing import Dict, Optional

import numpy as np

from beamsynth.solvers.base import (
    INITIAL_SPREAD,
    Landscape,
    deadline_passed,
    linear_ramp,
)

logger = logging.getLogger(__name__)

FEEDBACK_MIN = 0.01
FEEDBACK_MAX = 100.0


def simulated_cim(
    landscape: Landscape,
    params: Dict[str, float],
    batch_size: int,
    iterations: int,
    rng: np.random.Generator,
    deadline: Optional[float] = None,
) -> np.ndarray:
    """
    Mean-field amplitude iteration x ← clip(x + dt·((p(t)−1)·x + ξ·f) + noise).

    The pump gain p(t) ramps linearly from gain_start to gain_end, so the
    amplitudes first decay towards zero and later saturate at the ±1 clip.
    """
    k = landscape.half_bias.size
    dt = params["dt"]
    noise = params["noise_amplitude"] * np.sqrt(dt)
    gains = params["gain_start"] + (params["gain_end"] - params["gain_start"]) * linear_ramp(iterations)

    x = rng.normal(0.0, 0.01, size=(batch_size, k))
    for step, gain in enumerate(gains):
        if deadline_passed(step, deadline):
            logger.warning(f"SimCIM stopped at step {step}/{iterations}: deadline")
            break
        drift = (gain - 1.0) * x + landscape.xi * landscape.local_field(x)
        x = np.clip(x + dt * drift + noise * rng.standard_normal(x.shape), -1.0, 1.0)
    return x


def _chaotic_control(
    landscape: Landscape,
    params: Dict[str, float],
    batch_size: int,
    iterations: int,
    rng: np.random.Generator,
    deadline: Optional[float],
    track_field: bool,
) -> np.ndarray:
    k = landscape.half_bias.size
    dt = params["dt"]
    gain = params["gain"]
    target = params["target"]
    rho = params["rho"]
    clamp = params["clamp"]
    noise = params["noise_amplitude"] * np.sqrt(dt)

    x = rng.uniform(-INITIAL_SPREAD, INITIAL_SPREAD, size=(batch_size, k))
    e = np.ones_like(x)
    # the trajectory never settles, so each replica reports its best visited sign state
    best = np.where(x >= 0, 1.0, -1.0)
    best_energy = landscape.relative_energy(best)
    for step in range(iterations):
        if deadline_passed(step, deadline):
            logger.warning(f"Chaotic control stopped at step {step}/{iterations}: deadline")
            break
        injected = e * landscape.xi * landscape.local_field(x)
        x = x + dt * (-(x**3) + (gain - 1.0) * x + injected)
        if noise:
            x = x + noise * rng.standard_normal(x.shape)
        x = np.clip(x, -clamp, clamp)
        # CAC regulates the amplitude, CFC the injected field
        tracked = injected**2 if track_field else x**2
        e = np.clip(e - dt * rho * e * (tracked - target), FEEDBACK_MIN, FEEDBACK_MAX)

        spins = np.where(x >= 0, 1.0, -1.0)
        current = landscape.relative_energy(spins)
        improved = current < best_energy
        best[improved] = spins[improved]
        best_energy = np.where(improved, current, best_energy)
    return best


def amplitude_control(landscape, params, batch_size, iterations, rng, deadline=None) -> np.ndarray:
    """CAC: per-spin error variables drive x_i² towards the target amplitude."""
    return _chaotic_control(landscape, params, batch_size, iterations, rng, deadline, track_field=False)


def feedback_control(landscape, params, batch_size, iterations, rng, deadline=None) -> np.ndarray:
    """CFC: the same error variables drive the injected field towards the target."""
    return _chaotic_control(landscape, params, batch_size, iterations, rng, deadline, track_field=True)
