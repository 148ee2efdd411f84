"""
Spin encodings for discrete phases and quantized amplitudes.

Phase code: each antenna owns L = 2^{b−1} spins. Rows of a Gray table over the
half space, products over odd-size bit subsets, and the linear system S·c = p
give complex coefficients c such that c·x lands on the 2^b phase grid for every
consistent block x. Odd subset sizes make c·(−x) = −c·x, which covers the other
half of the grid.

Amplitude code: b_a spins per antenna with β = Σ c_k (1 − s_k), c_k = 1/2^{k+2}.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Tuple

import numpy as np

from beamsynth.errors import ConstructionError, DomainError
from beamsynth.utils.validation import (
    validate_gray_bits,
    validate_phase_bits,
    validate_spins,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
CONSTRUCTION_TOLERANCE = 1e-10
DEGENERATE_MODULUS = 1e-12
DEFAULT_AMP_BITS = 4


def gray_halfspace(bits: int) -> np.ndarray:
    """
    Gray-code rows for the first half of the b-bit state space.

    Row k holds gray(k) = k ⊕ (k ≫ 1) for k < 2^{b−1}, bit 0 ↦ +1 and 1 ↦ −1,
    column m being bit m counted from the least-significant end.
    """
    bits = validate_gray_bits(bits)
    rows = 1 << (bits - 1)
    k = np.arange(rows)
    gray = k ^ (k >> 1)
    bit_values = (gray[:, None] >> np.arange(bits)[None, :]) & 1
    return (1 - 2 * bit_values).astype(int)


def odd_subsets(bits: int) -> List[Tuple[int, ...]]:
    """Odd-cardinality subsets of {0..b−1}, by size then lexicographically."""
    bits = validate_gray_bits(bits)
    subsets: List[Tuple[int, ...]] = []
    for size in range(1, bits + 1, 2):
        subsets.extend(itertools.combinations(range(bits), size))
    return subsets


def odd_subset_matrix(gray: np.ndarray) -> np.ndarray:
    """S_{kj} = Π_{m∈O_j} G_{km} for the odd subsets O_j of the table's columns."""
    gray = np.asarray(gray, dtype=int)
    subsets = odd_subsets(gray.shape[1])
    return np.stack([np.prod(gray[:, list(subset)], axis=1) for subset in subsets], axis=1)


def odd_features(states: np.ndarray) -> np.ndarray:
    """
    Odd-product feature blocks for full b-bit ±1 states.

    Args:
        states: Array of shape (..., b) with ±1 entries

    Returns:
        Array of shape (..., 2^{b−1}), the consistent spin blocks for those states
    """
    states = np.asarray(states, dtype=int)
    subsets = odd_subsets(states.shape[-1])
    return np.stack([np.prod(states[..., list(subset)], axis=-1) for subset in subsets], axis=-1)


@dataclass(frozen=True, eq=False)
class PhaseCode:
    """Complex coefficients mapping an L-spin block onto a 2^b phase grid."""

    bits: int
    coefficients: np.ndarray

    @property
    def spins_per_antenna(self) -> int:
        return 1 << (self.bits - 1)

    @property
    def grid_size(self) -> int:
        return 1 << self.bits

    @property
    def grid_step(self) -> float:
        return TWO_PI / self.grid_size

    @property
    def allowed_grid(self) -> np.ndarray:
        return self.grid_step * np.arange(self.grid_size)


@dataclass(frozen=True, eq=False)
class AmpCode:
    """Geometric weights c_k = 1/2^{k+2} for amplitude spin blocks."""

    amp_bits: int
    coefficients: np.ndarray

    @property
    def grid_step(self) -> float:
        return 2.0 ** (-self.amp_bits)

    @property
    def max_amplitude(self) -> float:
        return 1.0 - self.grid_step

    @property
    def augmented(self) -> np.ndarray:
        """(−c_0, …, −c_{b−1}, Σc): β = c'·(s, 1)."""
        return np.append(-self.coefficients, self.coefficients.sum())


class PhaseDecode(NamedTuple):
    phase: float
    snap_distance: float
    degenerate: bool


@lru_cache(maxsize=None)
def build_phase_code(bits: int) -> PhaseCode:
    """
    Solve S·c = p with p_k = e^{i·kπ/2^{b−1}}.

    Results are cached per bit count, so the system is solved once per process.

    Raises:
        ConstructionError: If S is singular or the residual exceeds 1e−10
    """
    bits = validate_phase_bits(bits)
    gray = gray_halfspace(bits)
    system = odd_subset_matrix(gray).astype(complex)
    half = gray.shape[0]
    targets = np.exp(1j * np.arange(half) * np.pi / half)
    try:
        coefficients = np.linalg.solve(system, targets)
    except np.linalg.LinAlgError as e:
        logger.error(f"Odd-subset system for {bits} bits is singular: {e}")
        raise ConstructionError(f"cannot build {bits}-bit phase code: {e}") from e

    residual = float(np.max(np.abs(system @ coefficients - targets)))
    if residual >= CONSTRUCTION_TOLERANCE:
        raise ConstructionError(f"{bits}-bit phase code residual {residual:.2e}")
    coefficients.setflags(write=False)
    logger.debug(f"Built {bits}-bit phase code, residual {residual:.1e}")
    return PhaseCode(bits=bits, coefficients=coefficients)


def snap_to_grid(phases: np.ndarray, bits: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Snap angles to the nearest point of the 2^b grid; exact ties go to the lower index.

    Returns:
        (snapped phases in [0, 2π), absolute snap distances)
    """
    size = 1 << bits
    step = TWO_PI / size
    wrapped = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    index = np.ceil(wrapped / step - 0.5).astype(int)
    snapped = step * np.mod(index, size)
    distance = np.abs(wrapped - step * index)
    return snapped, distance


def decode_phase_blocks(code: PhaseCode, blocks: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized phase decode for spin blocks of shape (..., L).

    Returns:
        (snapped phases, snap distances, degenerate mask), each of shape (...)
    """
    blocks = np.asarray(blocks, dtype=float)
    values = blocks @ code.coefficients
    degenerate = np.abs(values) < DEGENERATE_MODULUS
    raw = np.where(degenerate, 0.0, np.angle(values))
    phases, distance = snap_to_grid(raw, code.bits)
    return phases, np.where(degenerate, 0.0, distance), degenerate


def decode_phase(code: PhaseCode, spin_block) -> PhaseDecode:
    """
    Phase for one antenna's spin block: arg(c·x) snapped onto the allowed grid.

    A zero-modulus dot product (possible only for inconsistent blocks when
    b ≥ 3) decodes to grid phase 0 and is flagged degenerate.
    """
    block = validate_spins(spin_block, code.spins_per_antenna)
    phases, distance, degenerate = decode_phase_blocks(code, block)
    if degenerate:
        logger.debug("Degenerate phase block decoded to 0")
    return PhaseDecode(float(phases), float(distance), bool(degenerate))


def decode_phases(code: PhaseCode, spins: np.ndarray, n_antennas: int) -> np.ndarray:
    """
    Decode antenna-major spin vectors into phase vectors.

    Args:
        code: Phase code
        spins: Shape (K,) or (B, K) with K = n_antennas·L
        n_antennas: Number of antennas

    Returns:
        Phases of shape (N,) or (B, N)
    """
    spins = np.asarray(spins, dtype=float)
    blocks = spins.reshape(spins.shape[:-1] + (n_antennas, code.spins_per_antenna))
    phases, _, _ = decode_phase_blocks(code, blocks)
    return phases


def build_amp_code(amp_bits: int = DEFAULT_AMP_BITS) -> AmpCode:
    """Amplitude code with coefficients (1/4, 1/8, …, 1/2^{b_a+1})."""
    if amp_bits < 1:
        raise DomainError(f"amp_bits must be >= 1, got {amp_bits}")
    coefficients = 1.0 / 2.0 ** (np.arange(amp_bits) + 2)
    coefficients.setflags(write=False)
    return AmpCode(amp_bits=int(amp_bits), coefficients=coefficients)


def decode_amplitude(amp_code: AmpCode, spin_block) -> float:
    """β = Σ c_k (1 − s_k), a multiple of 2^{−b_a} in [0, 1 − 2^{−b_a}]."""
    block = validate_spins(spin_block, amp_code.amp_bits)
    return float(amp_code.coefficients @ (1.0 - block))


def decode_amplitudes(amp_code: AmpCode, spins: np.ndarray, n_antennas: int) -> np.ndarray:
    """Decode antenna-major amplitude spins of shape (K,) or (B, K) into β vectors."""
    spins = np.asarray(spins, dtype=float)
    blocks = spins.reshape(spins.shape[:-1] + (n_antennas, amp_code.amp_bits))
    return (1.0 - blocks) @ amp_code.coefficients


def phase_code_table(bits: int) -> Dict[str, Any]:
    """JSON-ready dump of every intermediate of the phase-code construction."""
    code = build_phase_code(bits)
    gray = gray_halfspace(bits)
    system = odd_subset_matrix(gray)
    half = gray.shape[0]
    targets = np.exp(1j * np.arange(half) * np.pi / half)
    return {
        "bits": code.bits,
        "spins_per_antenna": code.spins_per_antenna,
        "gray_halfspace": gray.tolist(),
        "odd_subsets": [list(subset) for subset in odd_subsets(bits)],
        "odd_subset_matrix": system.tolist(),
        "targets": {"real": targets.real.tolist(), "imag": targets.imag.tolist()},
        "coefficients": {
            "real": code.coefficients.real.tolist(),
            "imag": code.coefficients.imag.tolist(),
        },
        "allowed_grid": code.allowed_grid.tolist(),
    }


def amp_code_table(amp_bits: int = DEFAULT_AMP_BITS) -> Dict[str, Any]:
    """JSON-ready dump of an amplitude code."""
    code = build_amp_code(amp_bits)
    return {
        "amp_bits": code.amp_bits,
        "coefficients": code.coefficients.tolist(),
        "grid_step": code.grid_step,
        "max_amplitude": code.max_amplitude,
    }
