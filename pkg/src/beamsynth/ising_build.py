"""
Quadratic Ising construction for phase and amplitude synthesis.

Energies follow E(s) = −sᵀJs − hᵀs + offset. Every coupling is a signed sum of
rank-one terms Re(v vᴴ), one per sampled angle, so that −sᵀJs reproduces
blend·P_side − (1−blend)·P_main for the decoded excitation.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from beamsynth.array_model import element_factor_power, steering_matrix
from beamsynth.encoding import AmpCode, PhaseCode
from beamsynth.errors import ConfigError, DomainError, SolverError
from beamsynth.utils.validation import validate_angles

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
NEAR_BAND_DEG = 30.0


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Symmetric coupling J, bias h and constant offset over K spins."""

    coupling: np.ndarray
    bias: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        coupling = np.asarray(self.coupling, dtype=float)
        bias = np.asarray(self.bias, dtype=float)
        if coupling.ndim != 2 or coupling.shape[0] != coupling.shape[1]:
            raise DomainError(f"coupling must be square, got shape {coupling.shape}")
        if bias.shape != (coupling.shape[0],):
            raise DomainError(
                f"bias length {bias.shape} does not match {coupling.shape[0]} spins"
            )
        if coupling.size and not np.allclose(
            coupling, coupling.T, rtol=0.0, atol=SYMMETRY_TOLERANCE * max(1.0, np.abs(coupling).max())
        ):
            raise DomainError("coupling matrix must be symmetric")
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n_spins(self) -> int:
        return int(self.bias.size)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Energies of a (B, K) batch of assignments."""
        s = np.asarray(spins, dtype=float)
        quadratic = np.einsum("bi,ij,bj->b", s, self.coupling, s)
        return -quadratic - s @ self.bias + self.offset


def energy(problem: IsingProblem, spins) -> float:
    """Exact −sᵀJs − hᵀs + offset for one assignment."""
    s = np.asarray(spins, dtype=float)
    if s.shape != (problem.n_spins,):
        raise DomainError(f"expected {problem.n_spins} spins, got shape {s.shape}")
    return float(-(s @ problem.coupling @ s) - problem.bias @ s + problem.offset)


@dataclass(frozen=True)
class SidelobeConfig:
    """
    Objective weighting for one target direction.

    Sidelobe samples cover [0°, 180°] at `sample_step`, skipping |θ−θ₀| <
    `guard_halfwidth`; samples within ±`near_band` of θ₀ get `near_weight`, the
    rest `far_weight`. `explicit_samples` replaces the sampled set with fixed
    (angle, weight) pairs, and `main_only` empties it on purpose.
    """

    theta0: float
    guard_halfwidth: float = 5.0
    sample_step: float = 1.0
    near_weight: float = 10.0
    far_weight: float = 1.0
    blend_weight: float = 0.5
    near_band: float = NEAR_BAND_DEG
    main_only: bool = False
    explicit_samples: Optional[Tuple[Tuple[float, float], ...]] = None
    _samples: Tuple[np.ndarray, np.ndarray] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        validate_angles(self.theta0)
        if not 0.0 < self.blend_weight < 1.0:
            raise ConfigError(f"blend_weight must lie in (0, 1), got {self.blend_weight}")
        if self.near_weight <= 0 or self.far_weight <= 0:
            raise ConfigError("sidelobe weights must be positive")
        if self.near_band <= 0:
            raise ConfigError(f"near_band must be positive, got {self.near_band}")
        if not 0.0 <= self.guard_halfwidth < self.near_band:
            raise ConfigError(
                f"guard_halfwidth must lie in [0, {self.near_band}), got {self.guard_halfwidth}"
            )
        if self.sample_step <= 0:
            raise ConfigError(f"sample_step must be positive, got {self.sample_step}")
        object.__setattr__(self, "_samples", self._build_samples())

    def _build_samples(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.main_only:
            return np.empty(0), np.empty(0)
        if self.explicit_samples is not None:
            pairs = np.asarray(self.explicit_samples, dtype=float).reshape(-1, 2)
            angles = validate_angles(pairs[:, 0])
            if np.any(pairs[:, 1] <= 0):
                raise ConfigError("explicit sample weights must be positive")
            return angles, pairs[:, 1].copy()
        count = int(np.floor(180.0 / self.sample_step + 1e-9)) + 1
        angles = np.minimum(self.sample_step * np.arange(count), 180.0)
        offset = np.abs(angles - self.theta0)
        angles = angles[offset >= self.guard_halfwidth]
        offset = offset[offset >= self.guard_halfwidth]
        weights = np.where(offset <= self.near_band, self.near_weight, self.far_weight)
        return angles, weights.astype(float)

    def sample_angles(self) -> Tuple[np.ndarray, np.ndarray]:
        """(sidelobe angles in degrees, their weights w_j)."""
        angles, weights = self._samples
        return angles.copy(), weights.copy()

    def signed_terms(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Angles with signed blend weights: +(1−blend) for θ₀, −blend·w_j for sidelobes.

        Raises:
            ConfigError: If the sidelobe set is empty without main_only
        """
        angles, weights = self._samples
        if angles.size == 0 and not self.main_only:
            raise ConfigError(f"no sidelobe samples remain for theta0={self.theta0}")
        all_angles = np.concatenate([[self.theta0], angles])
        signed = np.concatenate([[1.0 - self.blend_weight], -self.blend_weight * weights])
        return all_angles, signed


def phase_field_vector(code: PhaseCode, theta_deg: float, n_antennas: int) -> np.ndarray:
    """
    sqrt(E(θ))·(e_θ ⊗ c), antenna-major, length N·L.

    For any consistent spin vector s, vᵀs equals sqrt(E(θ)) times the array
    factor of the decoded unit-amplitude excitation.
    """
    return _phase_field_matrix(code, np.atleast_1d(theta_deg), n_antennas)[0]


def _phase_field_matrix(code: PhaseCode, angles: np.ndarray, n_antennas: int) -> np.ndarray:
    steer = steering_matrix(angles, n_antennas)
    scale = np.sqrt(element_factor_power(angles))
    return (scale[:, None, None] * steer[:, :, None] * code.coefficients[None, None, :]).reshape(
        len(angles), -1
    )


def rank_one_coupling(v: np.ndarray) -> np.ndarray:
    """Re(v ⊗ vᴴ); sᵀ·Re(vvᴴ)·s = |vᵀs|² for real s."""
    v = np.asarray(v, dtype=complex)
    return np.real(np.outer(v, v.conj()))


def _blended_coupling(vectors: np.ndarray, signed_weights: np.ndarray) -> np.ndarray:
    # Σ_t w_t Re(v_t v_tᴴ) as one matrix product, symmetrized against rounding
    coupling = np.real(vectors.T @ (signed_weights[:, None] * vectors.conj()))
    return 0.5 * (coupling + coupling.T)


def phase_problem(code: PhaseCode, sidelobe_config: SidelobeConfig, n_antennas: int) -> IsingProblem:
    """
    J = (1−blend)·J_main − blend·Σ_j w_j·J_j with h = 0.

    Minimizing −sᵀJs minimizes blend·P_side − (1−blend)·P_main for unit amplitudes.
    """
    angles, signed = sidelobe_config.signed_terms()
    vectors = _phase_field_matrix(code, angles, n_antennas)
    coupling = _blended_coupling(vectors, signed)
    logger.debug(
        f"Phase problem: {coupling.shape[0]} spins, {angles.size - 1} sidelobe samples, "
        f"theta0={sidelobe_config.theta0}"
    )
    return IsingProblem(coupling=coupling, bias=np.zeros(coupling.shape[0]))


def amplitude_field_factors(
    fixed_phases: np.ndarray, angles: np.ndarray, n_antennas: int
) -> np.ndarray:
    """d_{θ,n} = sqrt(E(θ))·e^{iα_n}·e^{iπn cosθ}, shape (len(angles), N)."""
    steer = steering_matrix(angles, n_antennas)
    scale = np.sqrt(element_factor_power(angles))
    return scale[:, None] * steer * np.exp(1j * np.asarray(fixed_phases, dtype=float))[None, :]


def augmented_vectors(field_factors: np.ndarray, amp_code: AmpCode) -> np.ndarray:
    """Rows v'_θ = d_θ ⊗ c', antenna-major with the constant slot last per antenna."""
    factors = np.atleast_2d(field_factors)
    return (factors[:, :, None] * amp_code.augmented[None, None, :]).reshape(factors.shape[0], -1)


def amplitude_problem(
    amp_code: AmpCode,
    fixed_phases,
    sidelobe_config: SidelobeConfig,
    n_antennas: int,
) -> IsingProblem:
    """
    Ising problem over amplitude spins for fixed phases.

    The blended augmented matrix over N·(b_a+1) slots is permuted so the N·b_a
    spin slots come first; J is the spin block, h_i is twice the row sum over
    the constant columns, and the constant block becomes the offset. For every
    assignment, energy(s) = blend·P_side(β(s)) − (1−blend)·P_main(β(s)).

    Raises:
        DomainError: If the phase count differs from n_antennas
    """
    phases = np.asarray(fixed_phases, dtype=float)
    if phases.shape != (n_antennas,):
        raise DomainError(f"expected {n_antennas} phases, got shape {phases.shape}")

    angles, signed = sidelobe_config.signed_terms()
    vectors = augmented_vectors(amplitude_field_factors(phases, angles, n_antennas), amp_code)
    blended = _blended_coupling(vectors, signed)

    width = amp_code.amp_bits + 1
    slots = np.arange(n_antennas * width).reshape(n_antennas, width)
    spin_slots = slots[:, :-1].ravel()
    const_slots = slots[:, -1]

    coupling = blended[np.ix_(spin_slots, spin_slots)]
    bias = 2.0 * blended[np.ix_(spin_slots, const_slots)].sum(axis=1)
    offset = -float(blended[np.ix_(const_slots, const_slots)].sum())
    return IsingProblem(coupling=coupling, bias=bias, offset=offset)


def check_finite(problem: IsingProblem) -> None:
    """Raise SolverError for empty or non-finite problems."""
    if problem.n_spins == 0:
        raise SolverError("problem has no spins")
    if not (np.all(np.isfinite(problem.coupling)) and np.all(np.isfinite(problem.bias))):
        raise SolverError("problem has non-finite couplings or biases")
