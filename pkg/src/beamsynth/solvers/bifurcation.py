"""
Simulated bifurcation dynamics (ballistic and discrete variants).

Both integrate y' = −(1 − a(t))·x + ξ·f, x' = y with symplectic Euler and a
detuning ramp a(t): 0 → 1. Positions are walled at ±1 with the momentum zeroed
on contact. The ballistic variant feeds f = J·x + h/2, the discrete variant
f = J·sign(x) + h/2.
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


def _bifurcate(
    landscape: Landscape,
    params: Dict[str, float],
    batch_size: int,
    iterations: int,
    rng: np.random.Generator,
    deadline: Optional[float],
    discrete: bool,
) -> np.ndarray:
    k = landscape.half_bias.size
    dt = params["dt"]
    x = rng.uniform(-INITIAL_SPREAD, INITIAL_SPREAD, size=(batch_size, k))
    y = rng.uniform(-INITIAL_SPREAD, INITIAL_SPREAD, size=(batch_size, k))

    for step, a in enumerate(linear_ramp(iterations)):
        if deadline_passed(step, deadline):
            logger.warning(f"Bifurcation stopped at step {step}/{iterations}: deadline")
            break
        source = np.sign(x) if discrete else x
        y += dt * (-(1.0 - a) * x + landscape.xi * landscape.local_field(source))
        x += dt * y
        wall = np.abs(x) > 1.0
        x = np.where(wall, np.sign(x), x)
        y = np.where(wall, 0.0, y)
    return x


def ballistic_sb(landscape, params, batch_size, iterations, rng, deadline=None) -> np.ndarray:
    """Ballistic simulated bifurcation; returns final positions (B, K)."""
    return _bifurcate(landscape, params, batch_size, iterations, rng, deadline, discrete=False)


def discrete_sb(landscape, params, batch_size, iterations, rng, deadline=None) -> np.ndarray:
    """Discrete simulated bifurcation; returns final positions (B, K)."""
    return _bifurcate(landscape, params, batch_size, iterations, rng, deadline, discrete=True)
