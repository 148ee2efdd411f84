"""
Precondition checks shared by the array model, encoders and builders.
"""
import logging
from typing import Iterable

import numpy as np

from beamsynth.errors import DomainError

logger = logging.getLogger(__name__)

ANGLE_MIN_DEG = 0.0
ANGLE_MAX_DEG = 180.0
SUPPORTED_PHASE_BITS = (1, 2, 3, 4)
GRAY_BITS_MAX = 8


def validate_angles(theta_deg) -> np.ndarray:
    """
    Check that every angle lies in [0°, 180°].

    Args:
        theta_deg: Scalar or array of angles in degrees

    Returns:
        The angles as a float array

    Raises:
        DomainError: If any angle is out of range or not finite
    """
    theta = np.asarray(theta_deg, dtype=float)
    if not np.all(np.isfinite(theta)):
        logger.warning("Angle rejected: not finite")
        raise DomainError("angles must be finite")
    if np.any(theta < ANGLE_MIN_DEG) or np.any(theta > ANGLE_MAX_DEG):
        logger.warning(f"Angle rejected: outside [0, 180]: {theta_deg}")
        raise DomainError(f"angle out of range [0, 180] degrees: {theta_deg}")
    return theta


def validate_phase_bits(bits: int) -> int:
    """Check a phase quantization bit count is one of the supported values."""
    if bits not in SUPPORTED_PHASE_BITS:
        logger.warning(f"Bits rejected: {bits}")
        raise DomainError(f"phase bits must be one of {SUPPORTED_PHASE_BITS}, got {bits}")
    return int(bits)


def validate_gray_bits(bits: int) -> int:
    """Check a Gray-table width lies in 1..8."""
    if not isinstance(bits, (int, np.integer)) or not 1 <= bits <= GRAY_BITS_MAX:
        raise DomainError(f"bits must lie in 1..{GRAY_BITS_MAX}, got {bits}")
    return int(bits)


def validate_spins(values: Iterable, length: int) -> np.ndarray:
    """
    Check a spin block has the expected length and only ±1 entries.

    Args:
        values: Spin values
        length: Required block length (trailing axis)

    Returns:
        The block as a float array
    """
    block = np.asarray(values, dtype=float)
    if block.shape[-1:] != (length,):
        raise DomainError(f"spin block must have length {length}, got shape {block.shape}")
    if not np.all(np.abs(block) == 1.0):
        logger.warning("Spin block rejected: entries other than ±1")
        raise DomainError("spin entries must be exactly +1 or -1")
    return block


def validate_amplitudes(amplitudes: Iterable, length: int) -> np.ndarray:
    """Check an amplitude vector has the expected length and lies in [0, 1]."""
    beta = np.asarray(amplitudes, dtype=float)
    if beta.shape != (length,):
        raise DomainError(f"expected {length} amplitudes, got shape {beta.shape}")
    if np.any(beta < 0.0) or np.any(beta > 1.0) or not np.all(np.isfinite(beta)):
        raise DomainError("amplitudes must lie in [0, 1]")
    return beta
