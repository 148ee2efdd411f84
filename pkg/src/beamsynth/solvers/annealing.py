"""
Annealing-style solvers: local quantum annealing (LQA) and noisy mean-field
annealing (NMFA).
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


def local_quantum_annealing(
    landscape: Landscape,
    params: Dict[str, float],
    batch_size: int,
    iterations: int,
    rng: np.random.Generator,
    deadline: Optional[float] = None,
) -> np.ndarray:
    """
    Product-state annealing with momentum gradient descent.

    Each spin is an angle θ_i = (π/2)·tanh(w_i) with ⟨Z⟩ = sin θ_i and
    ⟨X⟩ = cos θ_i. The cost t·ξ·E(sin θ) − (1−t)·Σ cos θ_i moves from the
    transverse term to the problem term as t goes 0 → 1.

    Returns:
        Final parameters w (B, K); their signs are the spins
    """
    k = landscape.half_bias.size
    lr = params["dt"]
    momentum = params["momentum"]

    w = rng.uniform(-INITIAL_SPREAD, INITIAL_SPREAD, size=(batch_size, k))
    velocity = np.zeros_like(w)
    for step, t in enumerate(linear_ramp(iterations)):
        if deadline_passed(step, deadline):
            logger.warning(f"LQA stopped at step {step}/{iterations}: deadline")
            break
        squashed = np.tanh(w)
        theta = 0.5 * np.pi * squashed
        z = np.sin(theta)
        # dE/dz = −2·(J z + h/2)
        d_energy = -2.0 * landscape.local_field(z)
        d_theta = t * landscape.xi * d_energy * np.cos(theta) + (1.0 - t) * np.sin(theta)
        d_w = d_theta * 0.5 * np.pi * (1.0 - squashed**2)
        velocity = momentum * velocity - lr * d_w
        w = w + velocity
    return w


def noisy_mean_field(
    landscape: Landscape,
    params: Dict[str, float],
    batch_size: int,
    iterations: int,
    rng: np.random.Generator,
    deadline: Optional[float] = None,
) -> np.ndarray:
    """
    m ← (1−ρ)·m + ρ·tanh((2ξ·f(m) + noise)/T) with T cooling geometrically.
    """
    k = landscape.half_bias.size
    rho = params["rho"]
    noise = params["noise_amplitude"]
    temperatures = params["temp_start"] * (params["temp_end"] / params["temp_start"]) ** linear_ramp(iterations)

    m = rng.uniform(-0.1 * INITIAL_SPREAD, 0.1 * INITIAL_SPREAD, size=(batch_size, k))
    for step, temperature in enumerate(temperatures):
        if deadline_passed(step, deadline):
            logger.warning(f"NMFA stopped at step {step}/{iterations}: deadline")
            break
        field = 2.0 * landscape.xi * landscape.local_field(m)
        if noise:
            field = field + noise * rng.standard_normal(m.shape)
        m = (1.0 - rho) * m + rho * np.tanh(field / temperature)
    return m
