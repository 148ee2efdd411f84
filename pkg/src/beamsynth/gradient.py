"""
Continuous optimization: Adam, the sidelobe-to-mainlobe ratio loss with its
analytic gradients, the classical branch and second-stage amplitude refinement.
"""
import logging
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from beamsynth.array_model import TWO_PI, element_factor_power, steering_matrix
from beamsynth.encoding import snap_to_grid
from beamsynth.ising_build import SidelobeConfig
from beamsynth.refine import BRANCH_CLASSICAL, Candidate, CandidateSet
from beamsynth.schemas import CaseSpec
from beamsynth.solvers.base import deadline_passed
from beamsynth.utils.validation import validate_amplitudes

logger = logging.getLogger(__name__)

DEGENERATE_RESEED = 0.5

LossFn = Callable[[np.ndarray], Tuple[float, np.ndarray]]


class AdamConfig(BaseModel):
    """Adam hyperparameters."""

    learning_rate: float = Field(0.05, gt=0, description="Step size")
    beta1: float = Field(0.9, gt=0, lt=1, description="First-moment decay")
    beta2: float = Field(0.999, gt=0, lt=1, description="Second-moment decay")
    epsilon: float = Field(1e-8, gt=0, description="Denominator guard")
    iterations: int = Field(500, ge=0, description="Update steps per run")
    seed: int = Field(0, ge=0, description="Seed for restart initialization")


class AdamResult(NamedTuple):
    x: np.ndarray
    loss: float
    initial_loss: float
    steps: int


def _objective_terms(sidelobe_config: SidelobeConfig) -> Tuple[np.ndarray, np.ndarray]:
    angles, weights = sidelobe_config.sample_angles()
    return np.concatenate([[sidelobe_config.theta0], angles]), weights


def power_gradients(
    phases: np.ndarray, amplitudes: np.ndarray, angles: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Powers at several angles with their derivatives.

    Returns:
        (P of shape (T,), ∂P/∂α of shape (T, N), ∂P/∂β of shape (T, N))
    """
    phases = np.asarray(phases, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=float)
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    element = np.atleast_1d(element_factor_power(angles))
    # u_{t,n} = e^{iα_n}·e^{iπn cosθ_t}
    u = steering_matrix(angles, phases.size) * np.exp(1j * phases)[None, :]
    field = u @ amplitudes
    common = np.conj(field)[:, None] * u
    power = element * np.abs(field) ** 2
    d_beta = 2.0 * element[:, None] * np.real(common)
    d_alpha = 2.0 * element[:, None] * np.real(1j * common * amplitudes[None, :])
    return power, d_alpha, d_beta


def _ratio_and_gradients(
    phases: np.ndarray, amplitudes: np.ndarray, sidelobe_config: SidelobeConfig
) -> Tuple[float, np.ndarray, np.ndarray]:
    angles, weights = _objective_terms(sidelobe_config)
    power, d_alpha, d_beta = power_gradients(phases, amplitudes, angles)
    main = power[0]
    if main <= 0.0:
        zeros = np.zeros_like(np.asarray(phases, dtype=float))
        return np.inf, zeros, zeros.copy()
    blend = sidelobe_config.blend_weight
    side = float(weights @ power[1:])
    d_side_alpha = weights @ d_alpha[1:]
    d_side_beta = weights @ d_beta[1:]
    scale = blend * main**2
    grad_alpha = (d_side_alpha * main - side * d_alpha[0]) / scale
    grad_beta = (d_side_beta * main - side * d_beta[0]) / scale
    return side / (blend * main), grad_alpha, grad_beta


def ratio_loss(phases, amplitudes, sidelobe_config: SidelobeConfig) -> float:
    """
    Σ_j w_j·P(θ_j) / (blend·P(θ₀)) over the objective's sidelobe samples.

    Returns +inf when the mainlobe power is zero.
    """
    loss, _, _ = _ratio_and_gradients(phases, amplitudes, sidelobe_config)
    return float(loss)


def loss_gradients(
    phases, amplitudes, sidelobe_config: SidelobeConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic (∂L/∂α, ∂L/∂β) of ratio_loss."""
    _, grad_alpha, grad_beta = _ratio_and_gradients(phases, amplitudes, sidelobe_config)
    return grad_alpha, grad_beta


def adam_minimize(
    x0: np.ndarray,
    loss_fn: LossFn,
    bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    config: Optional[AdamConfig] = None,
    deadline: Optional[float] = None,
) -> AdamResult:
    """
    Adam with bias correction and box projection after every step.

    Args:
        x0: Starting point
        loss_fn: Returns (loss, gradient) at a point
        bounds: (lower, upper) arrays or scalars; ±inf leaves a coordinate free
        config: Hyperparameters
        deadline: Optional time.monotonic() value that ends the run early

    Returns:
        The best point seen, never worse than the projected start
    """
    config = config or AdamConfig()
    x = np.array(x0, dtype=float)
    lower, upper = bounds if bounds is not None else (-np.inf, np.inf)
    x = np.clip(x, lower, upper)

    first = np.zeros_like(x)
    second = np.zeros_like(x)
    loss, grad = loss_fn(x)
    initial_loss = float(loss)
    best_x, best_loss = x.copy(), initial_loss
    steps = 0
    for t in range(1, config.iterations + 1):
        if not np.isfinite(loss) or deadline_passed(t - 1, deadline):
            break
        first = config.beta1 * first + (1.0 - config.beta1) * grad
        second = config.beta2 * second + (1.0 - config.beta2) * grad**2
        first_hat = first / (1.0 - config.beta1**t)
        second_hat = second / (1.0 - config.beta2**t)
        x = np.clip(x - config.learning_rate * first_hat / (np.sqrt(second_hat) + config.epsilon), lower, upper)
        steps = t
        loss, grad = loss_fn(x)
        if loss < best_loss:
            best_x, best_loss = x.copy(), float(loss)
    return AdamResult(x=best_x, loss=best_loss, initial_loss=initial_loss, steps=steps)


def amplitude_refine(
    fixed_phases,
    initial_amplitudes,
    sidelobe_config: SidelobeConfig,
    adam_config: Optional[AdamConfig] = None,
    deadline: Optional[float] = None,
) -> np.ndarray:
    """
    Adam over amplitudes only, inside [0, 1], from a quantum-stage decode.

    An all-zero start has no mainlobe and is re-seeded at 0.5.
    """
    phases = np.asarray(fixed_phases, dtype=float)
    beta0 = validate_amplitudes(initial_amplitudes, phases.size).copy()
    if not np.any(beta0):
        logger.debug("Amplitude refinement started from all zeros; re-seeding at 0.5")
        beta0 = np.full(phases.size, DEGENERATE_RESEED)

    def loss_fn(beta: np.ndarray) -> Tuple[float, np.ndarray]:
        loss, _, grad_beta = _ratio_and_gradients(phases, beta, sidelobe_config)
        return loss, grad_beta

    result = adam_minimize(beta0, loss_fn, (0.0, 1.0), adam_config, deadline)
    logger.debug(f"Amplitude refinement: loss {result.initial_loss:.6g} -> {result.loss:.6g} in {result.steps} steps")
    return result.x


def classical_branch(
    case: CaseSpec,
    sidelobe_config: SidelobeConfig,
    adam_config: Optional[AdamConfig] = None,
    n_restarts: int = 4,
    n_antennas: int = 32,
    deadline: Optional[float] = None,
) -> CandidateSet:
    """
    Random-restart gradient search over continuous phases, snapped to the case grid.

    Each restart draws α uniformly in [0, 2π) with β ≡ 1 and minimizes the ratio
    loss over α (jointly with β when the case optimizes amplitudes). The phases
    are then snapped onto the 2^bits grid and, for amplitude cases, β is refined
    again against the snapped phases.
    """
    adam_config = adam_config or AdamConfig()
    candidates = CandidateSet()
    for restart in range(n_restarts):
        if deadline_passed(0, deadline):
            logger.warning(f"[{case.case_id}] classical branch stopped after {restart} restarts: deadline")
            break
        rng = np.random.default_rng(np.random.SeedSequence([case.seed, adam_config.seed, restart]))
        alpha0 = rng.uniform(0.0, TWO_PI, n_antennas)
        beta0 = np.ones(n_antennas)

        if case.amp_opt:
            def joint_loss(x: np.ndarray) -> Tuple[float, np.ndarray]:
                loss, grad_alpha, grad_beta = _ratio_and_gradients(x[:n_antennas], x[n_antennas:], sidelobe_config)
                return loss, np.concatenate([grad_alpha, grad_beta])

            lower = np.concatenate([np.full(n_antennas, -np.inf), np.zeros(n_antennas)])
            upper = np.concatenate([np.full(n_antennas, np.inf), np.ones(n_antennas)])
            result = adam_minimize(
                np.concatenate([alpha0, beta0]), joint_loss, (lower, upper), adam_config, deadline
            )
            alpha, beta = result.x[:n_antennas], result.x[n_antennas:]
        else:
            def phase_loss(alpha: np.ndarray) -> Tuple[float, np.ndarray]:
                loss, grad_alpha, _ = _ratio_and_gradients(alpha, beta0, sidelobe_config)
                return loss, grad_alpha

            alpha = adam_minimize(alpha0, phase_loss, None, adam_config, deadline).x
            beta = beta0

        snapped, _ = snap_to_grid(alpha, case.bits)
        if case.amp_opt:
            beta = amplitude_refine(snapped, beta, sidelobe_config, adam_config, deadline)
        candidates.candidates.append(
            Candidate(
                phases=snapped,
                energy=ratio_loss(snapped, beta, sidelobe_config),
                provenance=BRANCH_CLASSICAL,
                amplitudes=np.clip(beta, 0.0, 1.0),
            )
        )
    logger.debug(f"[{case.case_id}] classical branch produced {len(candidates)} candidates")
    return candidates
