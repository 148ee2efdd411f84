"""
Exception hierarchy shared by every beamsynth module.
"""


class BeamError(Exception):
    """Base class for all beamsynth errors."""


class DomainError(BeamError, ValueError):
    """An argument lies outside the domain of an operation (angle, bits, spins)."""


class ConstructionError(BeamError):
    """An encoding system could not be solved."""


class ConfigError(BeamError, ValueError):
    """Invalid run, objective or solver configuration."""


class SolverError(BeamError):
    """An Ising problem cannot be handed to a solver."""


class ScoringError(BeamError):
    """A pattern or batch cannot be scored."""
