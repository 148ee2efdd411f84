"""
Shared solver types: kinds, configuration, candidate batches and the landscape
seen by the continuous dynamics.
"""
import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from beamsynth.ising_build import IsingProblem

logger = logging.getLogger(__name__)

INITIAL_SPREAD = 0.1
DEADLINE_CHECK_EVERY = 64


class SolverKind(str, Enum):
    BSB = "BSB"
    DSB = "DSB"
    SIMCIM = "SimCIM"
    LQA = "LQA"
    CAC = "CAC"
    CFC = "CFC"
    NMFA = "NMFA"


KIND_ORDER: Tuple[SolverKind, ...] = tuple(SolverKind)

# Per-kind constants; shared fields (dt, noise_amplitude) only win when set explicitly
KIND_DEFAULTS: Dict[SolverKind, Dict[str, float]] = {
    SolverKind.BSB: {},
    SolverKind.DSB: {},
    SolverKind.SIMCIM: {"gain_start": 0.0, "gain_end": 2.0, "noise_amplitude": 0.05},
    SolverKind.LQA: {"dt": 0.1, "momentum": 0.9},
    SolverKind.CAC: {"dt": 0.1, "gain": 0.9, "target": 1.0, "rho": 0.3, "clamp": 1.5},
    SolverKind.CFC: {"dt": 0.1, "gain": 0.9, "target": 1.0, "rho": 0.3, "clamp": 1.5},
    SolverKind.NMFA: {
        "rho": 0.2,
        "temp_start": 1.0,
        "temp_end": 0.02,
        "noise_amplitude": 0.1,
    },
}


class SolverConfig(BaseModel):
    """Batch, schedule and RNG settings shared by all dynamics."""

    batch_size: int = Field(64, gt=0, description="Independent replicas per solver")
    iterations: int = Field(1000, gt=0, description="Update steps per replica")
    dt: float = Field(0.3, gt=0, description="Integration time step")
    xi: Optional[float] = Field(
        None, gt=0, description="Coupling scale; None means 0.5/(sqrt(K)·sigma)"
    )
    noise_amplitude: float = Field(0.0, ge=0, description="Gaussian noise level")
    seed: int = Field(0, ge=0, lt=2**64, description="Master seed")
    overrides: Dict[str, Dict[str, float]] = Field(
        default_factory=dict, description="Per-kind constants keyed by kind name"
    )

    @field_validator("overrides")
    @classmethod
    def validate_override_kinds(cls, v):
        """Reject override keys that are not solver kinds."""
        known = {kind.value for kind in SolverKind}
        unknown = set(v) - known
        if unknown:
            raise ValueError(f"Unknown solver kinds in overrides: {sorted(unknown)}")
        return v

    def params_for(self, kind: SolverKind) -> Dict[str, float]:
        """Effective constants for one kind: shared < kind defaults < explicit < overrides."""
        params: Dict[str, float] = {"dt": self.dt, "noise_amplitude": self.noise_amplitude}
        params.update(KIND_DEFAULTS[kind])
        for name in ("dt", "noise_amplitude"):
            if name in self.model_fields_set:
                params[name] = getattr(self, name)
        params.update(self.overrides.get(kind.value, {}))
        return params


def kind_rng(seed: int, kind: SolverKind) -> np.random.Generator:
    """Independent stream per kind derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence([seed, KIND_ORDER.index(kind)]))


def coupling_scale(problem: IsingProblem) -> float:
    """RMS of the off-diagonal couplings together with h/2; 1.0 for an empty landscape."""
    k = problem.n_spins
    entries = problem.coupling[~np.eye(k, dtype=bool)]
    if np.any(problem.bias):
        entries = np.concatenate([entries, 0.5 * problem.bias])
    scale = float(np.sqrt(np.mean(entries**2))) if entries.size else 0.0
    return scale if scale > 0 else 1.0


@dataclass(frozen=True, eq=False)
class Landscape:
    """
    Off-diagonal couplings and half bias; local_field(x) is half the negative
    energy gradient, the diagonal dropping out because s_i² = 1.
    """

    coupling: np.ndarray
    half_bias: np.ndarray
    xi: float

    @classmethod
    def from_problem(cls, problem: IsingProblem, xi: Optional[float] = None) -> "Landscape":
        k = problem.n_spins
        coupling = problem.coupling.copy()
        np.fill_diagonal(coupling, 0.0)
        if xi is None:
            xi = 0.5 / (np.sqrt(k) * coupling_scale(problem))
        return cls(coupling=coupling, half_bias=0.5 * problem.bias, xi=float(xi))

    def local_field(self, x: np.ndarray) -> np.ndarray:
        return x @ self.coupling + self.half_bias

    def relative_energy(self, spins: np.ndarray) -> np.ndarray:
        """Energy of ±1 rows up to the constant diagonal and offset terms."""
        return -np.sum(spins * (spins @ self.coupling + 2.0 * self.half_bias), axis=-1)


def sign_readout(x: np.ndarray) -> np.ndarray:
    """±1 spins with sign(0) = +1."""
    return np.where(x >= 0, 1, -1).astype(np.int8)


def linear_ramp(iterations: int) -> np.ndarray:
    """Schedule values rising from 0 to 1 over the run."""
    if iterations == 1:
        return np.ones(1)
    return np.linspace(0.0, 1.0, iterations)


def deadline_passed(step: int, deadline: Optional[float]) -> bool:
    return (
        deadline is not None
        and step % DEADLINE_CHECK_EVERY == 0
        and time.monotonic() > deadline
    )


@dataclass(frozen=True, eq=False)
class CandidateBatch:
    """Spin assignments in {−1, 1}^K with energies and the producing kind."""

    spins: np.ndarray
    energies: np.ndarray
    provenance: Tuple[SolverKind, ...]

    def __post_init__(self) -> None:
        spins = np.asarray(self.spins, dtype=np.int8)
        energies = np.asarray(self.energies, dtype=float)
        if spins.ndim != 2 or energies.shape != (spins.shape[0],):
            raise ValueError("spins must be (B, K) with one energy per row")
        if len(self.provenance) != spins.shape[0]:
            raise ValueError("provenance must tag every row")
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self) -> int:
        return int(self.spins.shape[0])

    @property
    def kinds(self) -> Tuple[SolverKind, ...]:
        """Distinct kinds in first-seen order."""
        return tuple(dict.fromkeys(self.provenance))

    def best_index(self) -> int:
        return int(np.argmin(self.energies))

    def best(self) -> Tuple[np.ndarray, float]:
        index = self.best_index()
        return self.spins[index].copy(), float(self.energies[index])

    def for_kind(self, kind: SolverKind) -> "CandidateBatch":
        mask = np.array([tag == kind for tag in self.provenance], dtype=bool)
        return CandidateBatch(
            self.spins[mask],
            self.energies[mask],
            tuple(tag for tag in self.provenance if tag == kind),
        )

    @classmethod
    def concatenate(cls, batches: Sequence["CandidateBatch"], n_spins: int) -> "CandidateBatch":
        if not batches:
            return cls(np.empty((0, n_spins), dtype=np.int8), np.empty(0), ())
        provenance: Iterable[SolverKind] = (tag for batch in batches for tag in batch.provenance)
        return cls(
            np.concatenate([batch.spins for batch in batches]),
            np.concatenate([batch.energies for batch in batches]),
            tuple(provenance),
        )
