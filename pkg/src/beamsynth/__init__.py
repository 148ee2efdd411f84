"""
beamsynth - Hybrid quantum-inspired and gradient beamforming synthesis.
"""

__version__ = "0.1.0"
