"""
Solver registry, single-kind solve, the rainbow ensemble and the exhaustive oracle.
"""
import logging
import time
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np

from beamsynth.errors import SolverError
from beamsynth.ising_build import IsingProblem, check_finite
from beamsynth.solvers.annealing import local_quantum_annealing, noisy_mean_field
from beamsynth.solvers.base import (
    KIND_ORDER,
    CandidateBatch,
    Landscape,
    SolverConfig,
    SolverKind,
    kind_rng,
    sign_readout,
)
from beamsynth.solvers.bifurcation import ballistic_sb, discrete_sb
from beamsynth.solvers.cim import amplitude_control, feedback_control, simulated_cim
from beamsynth.solvers.pool import SolverPool

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_SPINS = 24
BRUTE_FORCE_CHUNK = 1 << 16

Dynamics = Callable[..., np.ndarray]

SOLVER_REGISTRY: Dict[SolverKind, Dynamics] = {}


def register_solver(kind: SolverKind, dynamics: Dynamics) -> None:
    """Register the dynamics function for a solver kind."""
    SOLVER_REGISTRY[kind] = dynamics
    logger.debug(f"Registered solver {kind.value}")


register_solver(SolverKind.BSB, ballistic_sb)
register_solver(SolverKind.DSB, discrete_sb)
register_solver(SolverKind.SIMCIM, simulated_cim)
register_solver(SolverKind.LQA, local_quantum_annealing)
register_solver(SolverKind.CAC, amplitude_control)
register_solver(SolverKind.CFC, feedback_control)
register_solver(SolverKind.NMFA, noisy_mean_field)


def solve(
    problem: IsingProblem,
    kind: SolverKind,
    config: Optional[SolverConfig] = None,
    deadline: Optional[float] = None,
) -> CandidateBatch:
    """
    Run one kind's dynamics over a batch of replicas and read out signs.

    Args:
        problem: Ising problem to minimize
        kind: Which dynamics to run
        config: Batch size, iterations, step and seed
        deadline: Optional time.monotonic() value after which iteration stops early

    Returns:
        CandidateBatch with energies recomputed from the problem

    Raises:
        SolverError: If the problem is empty or not finite
    """
    config = config or SolverConfig()
    kind = SolverKind(kind)
    check_finite(problem)

    params = config.params_for(kind)
    landscape = Landscape.from_problem(problem, config.xi)
    rng = kind_rng(config.seed, kind)

    start_time = time.monotonic()
    state = SOLVER_REGISTRY[kind](
        landscape, params, config.batch_size, config.iterations, rng, deadline
    )
    spins = sign_readout(state)
    energies = problem.energies(spins)
    logger.debug(
        f"{kind.value}: {config.batch_size}x{problem.n_spins} spins in "
        f"{time.monotonic() - start_time:.3f}s, best {energies.min():.6g}"
    )
    return CandidateBatch(spins, energies, (kind,) * config.batch_size)


def rainbow_solve(
    problem: IsingProblem,
    configs_per_kind: Union[SolverConfig, Mapping[SolverKind, SolverConfig], None] = None,
    enabled_kinds: Optional[Iterable[SolverKind]] = None,
    max_workers: Optional[int] = None,
    deadline: Optional[float] = None,
    pool: Optional[SolverPool] = None,
) -> CandidateBatch:
    """
    Run every enabled kind independently on the same problem and pool the batches.

    Kinds run on a worker pool; the union is ordered by kind, then replica index,
    so results do not depend on scheduling.
    """
    if enabled_kinds is None:
        kinds: Tuple[SolverKind, ...] = KIND_ORDER
    else:
        requested = {SolverKind(kind) for kind in enabled_kinds}
        kinds = tuple(kind for kind in KIND_ORDER if kind in requested)
    if not kinds:
        raise SolverError("no solver kinds enabled")

    def config_for(kind: SolverKind) -> SolverConfig:
        if configs_per_kind is None:
            return SolverConfig()
        if isinstance(configs_per_kind, SolverConfig):
            return configs_per_kind
        return configs_per_kind.get(kind, SolverConfig())

    pool = pool or SolverPool(max_workers)
    jobs = [
        (lambda kind=kind: solve(problem, kind, config_for(kind), deadline))
        for kind in kinds
    ]
    batches = pool.run(jobs)
    union = CandidateBatch.concatenate(batches, problem.n_spins)
    logger.info(
        f"Rainbow over {len(kinds)} kinds: {len(union)} candidates, "
        f"best energy {union.energies.min():.6g}"
    )
    return union


def brute_force(problem: IsingProblem) -> Tuple[np.ndarray, float]:
    """
    Exact ground state by enumeration in lexicographic spin order (+1 before −1).

    Raises:
        SolverError: If K is 0 or exceeds 24
    """
    check_finite(problem)
    k = problem.n_spins
    if k > BRUTE_FORCE_MAX_SPINS:
        raise SolverError(f"brute force supports at most {BRUTE_FORCE_MAX_SPINS} spins, got {k}")

    shifts = np.arange(k - 1, -1, -1)
    best_spins: Optional[np.ndarray] = None
    best_energy = np.inf
    for start in range(0, 1 << k, BRUTE_FORCE_CHUNK):
        index = np.arange(start, min(start + BRUTE_FORCE_CHUNK, 1 << k))
        spins = 1 - 2 * ((index[:, None] >> shifts[None, :]) & 1)
        energies = problem.energies(spins)
        position = int(np.argmin(energies))
        if energies[position] < best_energy:
            best_energy = float(energies[position])
            best_spins = spins[position].astype(np.int8)
    assert best_spins is not None
    return best_spins, best_energy
