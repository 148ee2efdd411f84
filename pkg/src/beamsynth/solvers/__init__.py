"""
Quantum-inspired Ising solvers and the rainbow ensemble.
"""

from beamsynth.solvers.base import (
    KIND_DEFAULTS,
    KIND_ORDER,
    CandidateBatch,
    SolverConfig,
    SolverKind,
)
from beamsynth.solvers.pool import SolverPool
from beamsynth.solvers.rainbow import brute_force, rainbow_solve, register_solver, solve

__all__ = [
    'SolverKind',
    'SolverConfig',
    'CandidateBatch',
    'KIND_ORDER',
    'KIND_DEFAULTS',
    'SolverPool',
    'solve',
    'rainbow_solve',
    'brute_force',
    'register_solver',
]
