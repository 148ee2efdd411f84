"""
Far-field radiation model of a uniform linear array.

Elements sit half a wavelength apart, so element n (1-based) contributes the
phase term π·n·cosθ. Angles are degrees at every public boundary; conversion to
radians happens only in `_cos_deg`.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from beamsynth.errors import DomainError
from beamsynth.utils.validation import validate_angles

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEFAULT_N_ANTENNAS = 32
ELEMENT_ROLLOFF_DB = 12.0
ELEMENT_FLOOR_DB = 30.0
SCORING_STEP_DEG = 0.05

ArrayLike = Union[float, np.ndarray]


def _cos_deg(theta_deg: ArrayLike) -> np.ndarray:
    return np.cos(np.deg2rad(theta_deg))


@dataclass(frozen=True)
class ArrayConfig:
    """Geometry of the array; only the element count is free."""

    n_antennas: int = DEFAULT_N_ANTENNAS

    def __post_init__(self) -> None:
        if self.n_antennas < 1:
            raise DomainError(f"n_antennas must be >= 1, got {self.n_antennas}")

    @property
    def element_index(self) -> np.ndarray:
        return np.arange(1, self.n_antennas + 1, dtype=float)


@dataclass(frozen=True, eq=False)
class Excitation:
    """
    Per-antenna phases α_n (radians, stored in [0, 2π)) and amplitudes β_n in [0, 1].
    """

    phases: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        phases = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        # mod can return 2π for inputs a hair below zero
        phases[phases >= TWO_PI] = 0.0
        amplitudes = np.asarray(self.amplitudes, dtype=float)
        if phases.ndim != 1 or phases.shape != amplitudes.shape:
            raise DomainError(
                f"phases and amplitudes must be equal-length vectors, "
                f"got {phases.shape} and {amplitudes.shape}"
            )
        if phases.size < 1:
            raise DomainError("an excitation needs at least one antenna")
        if np.any(amplitudes < 0.0) or np.any(amplitudes > 1.0):
            raise DomainError("amplitudes must lie in [0, 1]")
        phases.setflags(write=False)
        amplitudes = amplitudes.copy()
        amplitudes.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def n_antennas(self) -> int:
        return int(self.phases.size)

    @property
    def weights(self) -> np.ndarray:
        """Complex excitation coefficients β_n·e^{iα_n}."""
        return self.amplitudes * np.exp(1j * self.phases)

    @classmethod
    def uniform(cls, n_antennas: int) -> "Excitation":
        return cls(np.zeros(n_antennas), np.ones(n_antennas))

    @classmethod
    def steered(cls, theta0_deg: float, n_antennas: int) -> "Excitation":
        """Unit amplitudes with continuous phases α_n = −π·n·cosθ₀ (field peak at θ₀)."""
        validate_angles(theta0_deg)
        n = ArrayConfig(n_antennas).element_index
        return cls(-np.pi * n * _cos_deg(theta0_deg), np.ones(n_antennas))

    def to_dict(self) -> dict:
        return {"phases": self.phases.tolist(), "amplitudes": self.amplitudes.tolist()}


@dataclass(frozen=True)
class AngleGrid:
    """Uniform sampling of θ in degrees, both endpoints included."""

    start: float = 0.0
    end: float = 180.0
    step: float = SCORING_STEP_DEG
    samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise DomainError(f"grid step must be positive, got {self.step}")
        if self.end < self.start:
            raise DomainError("grid end must not precede start")
        validate_angles([self.start, self.end])
        count = int(np.floor((self.end - self.start) / self.step + 1e-9)) + 1
        samples = self.start + self.step * np.arange(count)
        if self.end - samples[-1] > 1e-9 * max(1.0, self.step):
            samples = np.append(samples, self.end)
        samples[-1] = min(samples[-1], self.end)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True, eq=False)
class Pattern:
    """Linear-scale power P(θ) = E(θ)·|F(θ)|² sampled on a grid."""

    grid: AngleGrid
    power: np.ndarray

    def __post_init__(self) -> None:
        power = np.asarray(self.power, dtype=float)
        if power.shape != (len(self.grid),):
            raise DomainError(
                f"pattern has {power.shape} samples for a grid of {len(self.grid)}"
            )
        if np.any(power < 0.0):
            raise DomainError("pattern power must be non-negative")
        power.setflags(write=False)
        object.__setattr__(self, "power", power)

    @property
    def theta(self) -> np.ndarray:
        return self.grid.samples


def element_factor_db(theta_deg: ArrayLike) -> ArrayLike:
    """
    Element factor in dB: −min{12·((θ−90)/90)², 30}.

    Args:
        theta_deg: Angle(s) in degrees, within [0, 180]

    Returns:
        dB value(s), same shape as the input
    """
    theta = validate_angles(theta_deg)
    value = -np.minimum(ELEMENT_ROLLOFF_DB * ((theta - 90.0) / 90.0) ** 2, ELEMENT_FLOOR_DB)
    return float(value) if value.ndim == 0 else value


def element_factor_power(theta_deg: ArrayLike) -> ArrayLike:
    """Element factor on a linear power scale, 10^{E_dB/10}."""
    value = np.power(10.0, np.asarray(element_factor_db(theta_deg)) / 10.0)
    return float(value) if value.ndim == 0 else value


def steering_matrix(theta_deg: ArrayLike, n_antennas: int) -> np.ndarray:
    """
    Steering vectors for several angles at once.

    Returns:
        Complex array of shape (len(theta), n_antennas), entry [t, n-1] = e^{iπ·n·cosθ_t}
    """
    theta = np.atleast_1d(validate_angles(theta_deg))
    n = ArrayConfig(n_antennas).element_index
    return np.exp(1j * np.pi * np.outer(_cos_deg(theta), n))


def steering_vector(theta_deg: float, n_antennas: int) -> np.ndarray:
    """Unit-modulus vector with entry n (1-based) equal to e^{iπ·n·cosθ}."""
    return steering_matrix(theta_deg, n_antennas)[0]


def field_sum(excitation: Excitation, theta_deg: float) -> complex:
    """Array factor Σ β_n e^{iα_n} e^{iπ n cosθ}, without the element factor."""
    return complex(steering_vector(theta_deg, excitation.n_antennas) @ excitation.weights)


def field_sums(excitation: Excitation, theta_deg: ArrayLike) -> np.ndarray:
    """Vectorized field_sum over many angles."""
    return steering_matrix(theta_deg, excitation.n_antennas) @ excitation.weights


def power(excitation: Excitation, theta_deg: float) -> float:
    """Radiated power E(θ)·|F(θ)|² in one direction."""
    value = element_factor_power(theta_deg) * abs(field_sum(excitation, theta_deg)) ** 2
    return max(float(value), 0.0)


def powers(excitation: Excitation, theta_deg: ArrayLike) -> np.ndarray:
    """Vectorized power over many angles."""
    theta = np.atleast_1d(np.asarray(theta_deg, dtype=float))
    values = element_factor_power(theta) * np.abs(field_sums(excitation, theta)) ** 2
    return np.maximum(values, 0.0)


def pattern(excitation: Excitation, grid: Optional[AngleGrid] = None) -> Pattern:
    """
    Evaluate the power pattern of an excitation over a grid.

    Args:
        excitation: Phases and amplitudes
        grid: Angle grid (defaults to the 0.05° scoring grid)

    Returns:
        Pattern pointwise equal to power()
    """
    grid = grid or AngleGrid()
    return Pattern(grid=grid, power=powers(excitation, grid.samples))
