"""
Case scoring: peak, −30 dB mainlobe edges, beamwidth, the three penalties,
zero rules and batch statistics.
"""
import logging
from collections import defaultdict
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from beamsynth.array_model import AngleGrid, Excitation, Pattern, pattern
from beamsynth.errors import ScoringError
from beamsynth.schemas import CaseResult, ScoreBreakdown, ScoreSummary

logger = logging.getLogger(__name__)

FULL_SCORE = 1000.0
EDGE_LEVEL_DB = -30.0
NEAR_BAND_DEG = 30.0
BEAMWIDTH_ALLOWANCE_DEG = 6.0
FAR_ALLOWANCE_DB = 15.0
NEAR_ALLOWANCE_DB = 30.0
WEIGHT_A = 100.0
WEIGHT_B = 80.0
WEIGHT_C = 20.0
POINTING_LIMIT_DEG = 1.0
TIME_LIMIT_SECONDS = 90.0
# dB assigned to zero-power samples relative to the peak
POWER_FLOOR_DB = -300.0


class Peak(NamedTuple):
    theta: float
    power: float
    index: int


class Edges(NamedTuple):
    theta1: float
    theta2: float
    open_left: bool
    open_right: bool

    @property
    def width(self) -> float:
        return self.theta2 - self.theta1


class Penalties(NamedTuple):
    a: float
    b: float
    c: float
    width: float


def _relative_db(power: np.ndarray, reference: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        ratio = 10.0 * np.log10(np.asarray(power, dtype=float) / reference)
    return np.maximum(ratio, POWER_FLOOR_DB)


def _reference_power(power: np.ndarray) -> float:
    reference = float(np.max(power)) if power.size else 0.0
    if reference <= 0.0:
        raise ScoringError("pattern has zero peak power")
    return reference


def peak(pattern: Pattern) -> Peak:
    """
    Grid argmax (first, so ties go to the smaller angle) refined by a parabola
    through the three neighbouring samples. The reported power is the grid maximum.
    """
    power = pattern.power
    theta = pattern.theta
    index = int(np.argmax(power))
    theta_peak = float(theta[index])
    if 0 < index < power.size - 1:
        left, centre, right = power[index - 1 : index + 2]
        curvature = left - 2.0 * centre + right
        if curvature < 0.0:
            offset = float(np.clip(0.5 * (left - right) / curvature, -0.5, 0.5))
            step = theta[index + 1] - theta[index] if offset > 0 else theta[index] - theta[index - 1]
            theta_peak += offset * step
    return Peak(theta=theta_peak, power=float(power[index]), index=index)


def _crossing(theta: np.ndarray, level_db: np.ndarray, below: int, above: int) -> float:
    # linear interpolation in dB between a sample at or under the level and one over it
    span = level_db[above] - level_db[below]
    fraction = (EDGE_LEVEL_DB - level_db[below]) / span
    return float(theta[below] + fraction * (theta[above] - theta[below]))


def mainlobe_edges(pattern: Pattern, theta_peak: Optional[float] = None) -> Edges:
    """
    Nearest −30 dB crossings on each side of the peak.

    A side without a crossing reports the domain boundary and is flagged open.

    Args:
        pattern: Sampled power pattern
        theta_peak: Peak direction; the grid argmax is used when omitted
    """
    power = pattern.power
    theta = pattern.theta
    level = _relative_db(power, _reference_power(power))
    if theta_peak is None:
        index = int(np.argmax(power))
    else:
        index = int(np.argmin(np.abs(theta - theta_peak)))

    under = level <= EDGE_LEVEL_DB
    left = np.flatnonzero(under[:index])
    right = np.flatnonzero(under[index + 1 :]) + index + 1

    if left.size:
        theta1, open_left = _crossing(theta, level, left[-1], left[-1] + 1), False
    else:
        theta1, open_left = float(theta[0]), True
    if right.size:
        theta2, open_right = _crossing(theta, level, right[0], right[0] - 1), False
    else:
        theta2, open_right = float(theta[-1]), True
    return Edges(theta1, theta2, open_left, open_right)


def penalty_terms(s_far_db: float, width_deg: float, s_near_db: float) -> Tuple[float, float, float]:
    """(a, b, c) from the worst far sidelobe, the beamwidth and the worst near sidelobe."""
    a = max(0.0, FAR_ALLOWANCE_DB + s_far_db)
    b = max(0.0, width_deg - BEAMWIDTH_ALLOWANCE_DEG)
    c = max(0.0, NEAR_ALLOWANCE_DB + s_near_db)
    return a, b, c


def _worst(level: np.ndarray, mask: np.ndarray) -> float:
    return float(level[mask].max()) if np.any(mask) else -np.inf


def penalties(pattern: Pattern, theta0: float, edges: Edges) -> Penalties:
    """
    a from the far region θ ∉ [θ₀−30, θ₀+30], b from the beamwidth θ₂ − θ₁, c from
    the near regions [θ₀−30, θ₁] and [θ₂, θ₀+30]; all peak-relative.

    Raises:
        ScoringError: If the pattern has zero peak power
    """
    theta = pattern.theta
    level = _relative_db(pattern.power, _reference_power(pattern.power))
    far = (theta < theta0 - NEAR_BAND_DEG) | (theta > theta0 + NEAR_BAND_DEG)
    near = ((theta >= theta0 - NEAR_BAND_DEG) & (theta <= edges.theta1)) | (
        (theta >= edges.theta2) & (theta <= theta0 + NEAR_BAND_DEG)
    )
    a, b, c = penalty_terms(_worst(level, far), edges.width, _worst(level, near))
    return Penalties(a=a, b=b, c=c, width=edges.width)


def case_score(
    pattern: Pattern,
    theta0: float,
    elapsed_seconds: float,
    time_limit: float = TIME_LIMIT_SECONDS,
) -> ScoreBreakdown:
    """
    Score one pattern: 1000 − 100a − 80b − 20c clamped to [0, 1000].

    The score is zero when the peak misses θ₀ by more than 1° or when the
    elapsed time exceeds the limit; every term is still reported.
    """
    found = peak(pattern)
    if found.power <= 0.0:
        raise ScoringError("pattern has zero peak power")
    edges = mainlobe_edges(pattern, found.theta)
    terms = penalties(pattern, theta0, edges)
    pointing_error = abs(found.theta - theta0)

    if pointing_error > POINTING_LIMIT_DEG:
        zero_reason = "pointing"
    elif elapsed_seconds > time_limit:
        zero_reason = "timeout"
    else:
        zero_reason = "none"

    raw = FULL_SCORE - WEIGHT_A * terms.a - WEIGHT_B * terms.b - WEIGHT_C * terms.c
    y = 0.0 if zero_reason != "none" else float(np.clip(raw, 0.0, FULL_SCORE))
    return ScoreBreakdown(
        theta_peak=found.theta,
        pointing_error=pointing_error,
        theta1=edges.theta1,
        theta2=edges.theta2,
        open_left=edges.open_left,
        open_right=edges.open_right,
        W=terms.width,
        penalty_a=terms.a,
        penalty_b=terms.b,
        penalty_c=terms.c,
        y=y,
        zero_reason=zero_reason,
    )


def score_excitation(
    excitation: Excitation,
    theta0: float,
    elapsed_seconds: float = 0.0,
    grid: Optional[AngleGrid] = None,
    time_limit: float = TIME_LIMIT_SECONDS,
) -> ScoreBreakdown:
    """Evaluate an excitation on the scoring grid and score it."""
    return case_score(pattern(excitation, grid), theta0, elapsed_seconds, time_limit)


def batch_score(breakdowns: Sequence[ScoreBreakdown]) -> float:
    """Arithmetic mean of y over a non-empty batch."""
    if not breakdowns:
        raise ScoringError("cannot score an empty batch")
    return float(np.mean([breakdown.y for breakdown in breakdowns]))


def score_summary(results: Sequence[CaseResult]) -> ScoreSummary:
    """Per-case breakdowns with mean, total, success rate and per-bits means."""
    if not results:
        raise ScoringError("cannot summarize an empty batch")
    scores = [result.y for result in results]
    by_bits: Dict[int, List[float]] = defaultdict(list)
    for result in results:
        by_bits[result.bits].append(result.y)
    return ScoreSummary(
        cases={result.case_id: result.breakdown for result in results},
        mean=batch_score([result.breakdown for result in results]),
        total=float(np.sum(scores)),
        success_rate=float(np.mean([score > 0 for score in scores])),
        per_bits_mean={bits: float(np.mean(values)) for bits, values in sorted(by_bits.items())},
    )
