"""
Utilities module initialization.
"""

from beamsynth.utils.logging import StageLogger, setup_logging
from beamsynth.utils.validation import (
    validate_amplitudes,
    validate_angles,
    validate_phase_bits,
    validate_spins,
)

__all__ = [
    'setup_logging',
    'StageLogger',
    'validate_angles',
    'validate_phase_bits',
    'validate_spins',
    'validate_amplitudes',
]
