"""
Dual-branch synthesis per case under a wall-clock budget, batch running,
ablations and pattern export.
"""
import logging
import time
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from beamsynth.array_model import AngleGrid, Excitation, Pattern, pattern
from beamsynth.config import RunConfig
from beamsynth.encoding import build_amp_code, build_phase_code, decode_amplitudes, snap_to_grid
from beamsynth.errors import ConfigError, DomainError, ScoringError
from beamsynth.gradient import amplitude_refine, classical_branch
from beamsynth.ising_build import SidelobeConfig, amplitude_problem, phase_problem
from beamsynth.refine import (
    BRANCH_FALLBACK,
    BRANCH_ORDER,
    BRANCH_QUANTUM,
    Candidate,
    CandidateSet,
    cluster_refine,
)
from beamsynth.schemas import CaseResult, CaseSpec, ExcitationRecord, ScoreBreakdown
from beamsynth.scoring import batch_score, case_score
from beamsynth.solvers.base import SolverKind
from beamsynth.solvers.pool import SolverPool
from beamsynth.solvers.rainbow import rainbow_solve
from beamsynth.utils.logging import StageLogger

logger = logging.getLogger(__name__)

THETA0_RANGE = (45.0, 134.0)
PHASE_BITS = (1, 2, 3, 4)
# 3-bit cases are optimized with the 4-bit code and snapped to the 8-point grid
SOLVE_BITS = {1: 1, 2: 2, 3: 4, 4: 4}

STAGE_PHASE = "phase_solve"
STAGE_AMPLITUDE = "amplitude_solve"
STAGE_GRADIENT = "gradient_branch"
STAGE_EVALUATE = "evaluate"

VARIANT_HYBRID = "hybrid"
VARIANT_QUANTUM = "quantum-only"
VARIANT_CLASSICAL = "classical-only"
SINGLE_PREFIX = "single-"
ABLATION_VARIANTS: Tuple[str, ...] = (VARIANT_HYBRID, VARIANT_QUANTUM, VARIANT_CLASSICAL) + tuple(
    f"{SINGLE_PREFIX}{kind.value}" for kind in SolverKind
)

ABLATION_SUMMARY_COLUMNS = ["variant", "cases", "total", "mean", "success_rate"]
ABLATION_CASE_COLUMNS = [
    "variant",
    "case_id",
    "bits",
    "amp_opt",
    "y",
    "zero_reason",
    "branch_provenance",
    "elapsed_seconds",
]

PATTERN_COLUMNS = ["theta_deg", "power_db"]
PATTERN_FLOOR_DB = -300.0


class BatchResult(NamedTuple):
    results: List[CaseResult]
    mean_score: float


class AblationResult(NamedTuple):
    summary: pd.DataFrame
    per_case: pd.DataFrame


@dataclass
class _Evaluated:
    candidate: Candidate
    pattern: Pattern
    y: float
    rank: Tuple[int, int]


def generate_cases(n: int, seed: int) -> List[CaseSpec]:
    """
    Seeded random cases: θ₀ uniform in [45°, 134°], bits uniform in {1..4},
    amp_opt a fair coin.
    """
    if n < 0:
        raise DomainError(f"case count must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    cases = []
    for index in range(n):
        theta0 = round(float(rng.uniform(*THETA0_RANGE)), 3)
        bits = int(rng.choice(PHASE_BITS))
        amp_opt = bool(rng.integers(0, 2))
        case_seed = int(rng.integers(0, 2**31))
        cases.append(
            CaseSpec(case_id=f"case-{index:04d}", theta0=theta0, bits=bits, amp_opt=amp_opt, seed=case_seed)
        )
    logger.info(f"Generated {n} cases with seed {seed}")
    return cases


def derive_seed(*entropy: int) -> int:
    """Deterministic 63-bit seed from integer entropy."""
    return int(np.random.SeedSequence(list(entropy)).generate_state(1, dtype=np.uint64)[0] >> 1)


def fallback_excitation(case: CaseSpec, n_antennas: int) -> Excitation:
    """Continuous steering phases snapped onto the case grid, β ≡ 1."""
    steered = Excitation.steered(case.theta0, n_antennas)
    phases, _ = snap_to_grid(steered.phases, case.bits)
    return Excitation(phases, np.ones(n_antennas))


class _Budget:
    """Cumulative stage deadlines measured from the start of a case."""

    def __init__(self, config: RunConfig):
        self.start = time.monotonic()
        self.end = self.start + config.budget_seconds
        split = config.split
        quantum = config.branches.quantum
        classical = config.branches.classical
        # a disabled branch hands its share to the other one
        phase_share = split.phase_solve + (0.0 if classical else split.gradient_branch)
        amplitude_share = split.amplitude_solve
        gradient_share = split.gradient_branch + (
            0.0 if quantum else split.phase_solve + split.amplitude_solve
        )
        seconds = config.budget_seconds
        self.phase = self.start + phase_share * seconds if quantum else self.start
        self.amplitude = self.phase + amplitude_share * seconds if quantum else self.phase
        self.gradient = self.amplitude + gradient_share * seconds if classical else self.amplitude

    def expired(self, deadline: Optional[float] = None) -> bool:
        return time.monotonic() >= (self.end if deadline is None else min(deadline, self.end))

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def _quantum_branch(
    case: CaseSpec,
    objective: SidelobeConfig,
    config: RunConfig,
    budget: _Budget,
    stages: StageLogger,
    pool: SolverPool,
) -> CandidateSet:
    n = config.n_antennas
    if budget.expired(budget.phase):
        stages.skip(STAGE_PHASE, "budget exhausted")
        return CandidateSet()

    stages.start(STAGE_PHASE)
    code = build_phase_code(SOLVE_BITS[case.bits])
    solver_config = config.phase_solver.model_copy(
        update={"seed": derive_seed(config.seed, case.seed, 0)}
    )
    batch = rainbow_solve(
        phase_problem(code, objective, n),
        solver_config,
        enabled_kinds=config.enabled_kinds,
        deadline=min(budget.phase, budget.end),
        pool=pool,
    )
    decoded = CandidateSet.from_batch(batch, code, n, target_bits=case.bits)
    refined = cluster_refine(decoded, config.refine_m)
    stages.finish(STAGE_PHASE, candidates=len(refined))

    if not case.amp_opt:
        return refined
    if budget.expired(budget.amplitude):
        stages.skip(STAGE_AMPLITUDE, "budget exhausted")
        return refined

    stages.start(STAGE_AMPLITUDE)
    amp_code = build_amp_code(config.amp_bits)
    amplified: List[Candidate] = []
    for position, candidate in enumerate(refined):
        if budget.expired(budget.amplitude):
            # unrefined candidates keep β ≡ 1
            amplified.extend(refined.candidates[position:])
            break
        problem = amplitude_problem(amp_code, candidate.phases, objective, n)
        amp_config = config.amplitude_solver.model_copy(
            update={"seed": derive_seed(config.seed, case.seed, 1, position)}
        )
        amp_batch = rainbow_solve(
            problem,
            amp_config,
            enabled_kinds=config.enabled_kinds,
            deadline=min(budget.amplitude, budget.end),
            pool=pool,
        )
        spins, _ = amp_batch.best()
        beta = decode_amplitudes(amp_code, spins, n)
        beta = amplitude_refine(candidate.phases, beta, objective, config.adam, min(budget.amplitude, budget.end))
        amplified.append(
            Candidate(
                phases=candidate.phases,
                energy=candidate.energy,
                provenance=candidate.provenance,
                spins=candidate.spins,
                amplitudes=beta,
            )
        )
    stages.finish(STAGE_AMPLITUDE, candidates=len(amplified))
    return CandidateSet(amplified)


def _evaluate(
    candidate: Candidate,
    position: int,
    case: CaseSpec,
    grid: AngleGrid,
    config: RunConfig,
) -> _Evaluated:
    amplitudes = candidate.amplitudes if case.amp_opt and candidate.amplitudes is not None else None
    excitation = Excitation(
        candidate.phases, np.ones(config.n_antennas) if amplitudes is None else np.clip(amplitudes, 0.0, 1.0)
    )
    evaluated = pattern(excitation, grid)
    breakdown = case_score(evaluated, case.theta0, 0.0, config.time_limit)
    return _Evaluated(
        candidate=candidate,
        pattern=evaluated,
        y=breakdown.y,
        rank=(BRANCH_ORDER.index(candidate.branch), position),
    )


def _better(challenger: _Evaluated, incumbent: Optional[_Evaluated]) -> bool:
    if incumbent is None or challenger.y > incumbent.y:
        return True
    return challenger.y == incumbent.y and challenger.rank < incumbent.rank


def run_case(case: CaseSpec, config: RunConfig, pool: Optional[SolverPool] = None) -> CaseResult:
    """
    Optimize one case with both branches and return the best scored excitation.

    The snapped steering excitation is scored first, so a result exists however
    early the budget runs out. Pooled candidates are then scored on the full
    grid, at most `candidate_cap` of them; equal scores prefer quantum over
    classical over fallback.
    """
    if config.budget_seconds <= 0:
        raise ConfigError(f"budget must be positive, got {config.budget_seconds}")
    budget = _Budget(config)
    stages = StageLogger(case.case_id)
    pool = pool or SolverPool(config.threads)
    grid = AngleGrid(step=config.score_step)
    n = config.n_antennas
    objective = config.objective.for_target(case.theta0)

    fallback_exc = fallback_excitation(case, n)
    fallback = Candidate(
        phases=fallback_exc.phases,
        energy=np.inf,
        provenance=BRANCH_FALLBACK,
        amplitudes=fallback_exc.amplitudes,
    )
    best = _evaluate(fallback, 0, case, grid, config)

    quantum = CandidateSet()
    if config.branches.quantum:
        quantum = _quantum_branch(case, objective, config, budget, stages, pool)

    classical = CandidateSet()
    if config.branches.classical:
        if budget.expired(budget.gradient):
            stages.skip(STAGE_GRADIENT, "budget exhausted")
        else:
            stages.start(STAGE_GRADIENT)
            classical = classical_branch(
                case,
                objective,
                config.adam.model_copy(update={"seed": derive_seed(config.seed, case.seed, 2)}),
                config.classical_restarts,
                n,
                min(budget.gradient, budget.end),
            )
            stages.finish(STAGE_GRADIENT, candidates=len(classical))

    stages.start(STAGE_EVALUATE)
    pooled = (quantum + classical).candidates[: config.candidate_cap - 1]
    evaluated = 1
    for position, candidate in enumerate(pooled):
        if budget.expired():
            logger.warning(f"[{case.case_id}] budget expired after {evaluated} evaluations")
            break
        try:
            challenger = _evaluate(candidate, position, case, grid, config)
        except ScoringError as e:
            logger.warning(f"[{case.case_id}] candidate {position} not scorable: {str(e)}")
            continue
        evaluated += 1
        if _better(challenger, best):
            best = challenger
    stages.finish(STAGE_EVALUATE, candidates=evaluated, best_score=best.y)

    elapsed = budget.elapsed()
    breakdown = case_score(best.pattern, case.theta0, elapsed, config.time_limit)
    amplitudes = best.candidate.amplitudes if case.amp_opt and best.candidate.amplitudes is not None else None
    excitation = Excitation(
        best.candidate.phases, np.ones(n) if amplitudes is None else np.clip(amplitudes, 0.0, 1.0)
    )
    provenance = best.candidate.provenance
    if best.candidate.branch == BRANCH_QUANTUM:
        provenance = f"{BRANCH_QUANTUM}/{provenance}"
    logger.info(f"[{case.case_id}] y={breakdown.y:.2f} from {provenance} in {elapsed:.2f}s")
    return CaseResult(
        case_id=case.case_id,
        theta0=case.theta0,
        bits=case.bits,
        amp_opt=case.amp_opt,
        excitation=ExcitationRecord.from_excitation(excitation),
        breakdown=breakdown,
        elapsed_seconds=elapsed,
        branch_provenance=provenance,
        config_fingerprint=config.fingerprint(),
        candidates_evaluated=evaluated,
    )


def failed_result(case: CaseSpec, config: RunConfig, error: Exception, elapsed: float) -> CaseResult:
    """Zero-score record for a case that raised."""
    return CaseResult(
        case_id=case.case_id,
        theta0=case.theta0,
        bits=case.bits,
        amp_opt=case.amp_opt,
        excitation=ExcitationRecord.from_excitation(Excitation.uniform(config.n_antennas)),
        breakdown=ScoreBreakdown.failed(),
        elapsed_seconds=elapsed,
        branch_provenance="failure",
        config_fingerprint=config.fingerprint(),
        error=str(error),
    )


def run_batch(cases: Sequence[CaseSpec], config: RunConfig) -> BatchResult:
    """
    Run cases one after another; a failing case scores 0 without stopping the batch.

    Raises:
        DomainError: If there are no cases
    """
    if not cases:
        raise DomainError("cannot run an empty batch")
    pool = SolverPool(config.threads)
    results: List[CaseResult] = []
    for case in cases:
        start_time = time.monotonic()
        try:
            results.append(run_case(case, config, pool))
        except Exception as e:
            logger.error(f"Case {case.case_id} failed: {str(e)}")
            results.append(failed_result(case, config, e, time.monotonic() - start_time))
    mean_score = batch_score([result.breakdown for result in results])
    logger.info(f"Batch of {len(results)} cases: mean score {mean_score:.2f}")
    logger.debug(f"Solver pool: {pool.health_check()}")
    return BatchResult(results=results, mean_score=mean_score)


def export_pattern(result: CaseResult, grid: Optional[AngleGrid] = None) -> pd.DataFrame:
    """Pattern of a result as (theta_deg, power_db relative to the grid peak)."""
    grid = grid or AngleGrid()
    evaluated = pattern(result.excitation.to_excitation(), grid)
    reference = float(evaluated.power.max())
    with np.errstate(divide="ignore"):
        power_db = 10.0 * np.log10(evaluated.power / reference)
    return pd.DataFrame(
        {"theta_deg": grid.samples, "power_db": np.maximum(power_db, PATTERN_FLOOR_DB)},
        columns=PATTERN_COLUMNS,
    )


def pattern_from_frame(frame: pd.DataFrame) -> Pattern:
    """Rebuild a (peak-normalized) Pattern from exported pattern data."""
    missing = set(PATTERN_COLUMNS) - set(frame.columns)
    if missing:
        raise DomainError(f"pattern data lacks columns {sorted(missing)}")
    theta = frame["theta_deg"].to_numpy(dtype=float)
    if theta.size < 2:
        raise DomainError("pattern data needs at least two rows")
    grid = AngleGrid(start=float(theta[0]), end=float(theta[-1]), step=round(float(theta[1] - theta[0]), 9))
    power = np.power(10.0, frame["power_db"].to_numpy(dtype=float) / 10.0)
    return Pattern(grid=grid, power=power)


def variant_config(config: RunConfig, variant: str) -> RunConfig:
    """Copy of a run configuration with one ablation variant applied."""
    if variant == VARIANT_HYBRID:
        return config
    if variant == VARIANT_QUANTUM:
        return config.model_copy(update={"branches": config.branches.model_copy(update={"classical": False})})
    if variant == VARIANT_CLASSICAL:
        return config.model_copy(update={"branches": config.branches.model_copy(update={"quantum": False})})
    if variant.startswith(SINGLE_PREFIX):
        try:
            kind = SolverKind(variant[len(SINGLE_PREFIX) :])
        except ValueError as e:
            raise DomainError(
                f"unknown ablation variant {variant!r}; expected one of {list(ABLATION_VARIANTS)}"
            ) from e
        return config.model_copy(
            update={
                "branches": config.branches.model_copy(update={"classical": False}),
                "enabled_kinds": [kind],
            }
        )
    raise DomainError(f"unknown ablation variant {variant!r}; expected one of {list(ABLATION_VARIANTS)}")


def run_ablation(
    cases: Sequence[CaseSpec],
    config: RunConfig,
    variants: Sequence[str] = ABLATION_VARIANTS,
) -> AblationResult:
    """
    Run each variant on the same cases and seeds.

    Returns:
        AblationResult whose summary has one row per variant (total, mean and
        success rate, the fraction of y > 0) and whose per-case table has one
        row per (variant, case) with the score and the winning branch
    """
    configs = [(variant, variant_config(config, variant)) for variant in variants]
    rows = []
    per_case = []
    for variant, variant_cfg in configs:
        logger.info(f"Ablation variant {variant}")
        batch = run_batch(cases, variant_cfg)
        scores = np.array([result.y for result in batch.results])
        rows.append(
            {
                "variant": variant,
                "cases": len(scores),
                "total": float(scores.sum()),
                "mean": batch.mean_score,
                "success_rate": float(np.mean(scores > 0)),
            }
        )
        per_case.extend(
            {
                "variant": variant,
                "case_id": result.case_id,
                "bits": result.bits,
                "amp_opt": result.amp_opt,
                "y": result.y,
                "zero_reason": result.breakdown.zero_reason,
                "branch_provenance": result.branch_provenance,
                "elapsed_seconds": result.elapsed_seconds,
            }
            for result in batch.results
        )
    return AblationResult(
        summary=pd.DataFrame(rows, columns=ABLATION_SUMMARY_COLUMNS),
        per_case=pd.DataFrame(per_case, columns=ABLATION_CASE_COLUMNS),
    )
