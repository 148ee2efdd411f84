"""
Serializable records exchanged between the pipeline, the CLI and result files.
"""
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from beamsynth.array_model import Excitation

THETA0_MIN_DEG = 45.0
THETA0_MAX_DEG = 134.0
GRID_TOLERANCE = 1e-9

ZeroReason = Literal["none", "pointing", "timeout", "failure"]


class CaseSpec(BaseModel):
    """One optimization task: target direction, phase bits and amplitude switch."""

    case_id: str = Field(..., min_length=1, description="Unique case identifier")
    theta0: float = Field(..., ge=THETA0_MIN_DEG, le=THETA0_MAX_DEG, description="Target direction in degrees")
    bits: int = Field(..., description="Phase quantization bits")
    amp_opt: bool = Field(False, description="Whether amplitudes may be optimized")
    seed: int = Field(0, ge=0, description="Per-case seed")

    @field_validator("bits")
    @classmethod
    def validate_bits(cls, v):
        """Validate phase bits."""
        if v not in (1, 2, 3, 4):
            raise ValueError(f"bits must be one of (1, 2, 3, 4), got {v}")
        return v


class ScoreBreakdown(BaseModel):
    """Every term of a case score; penalties are left unrounded."""

    theta_peak: float
    pointing_error: float
    theta1: float
    theta2: float
    open_left: bool = False
    open_right: bool = False
    W: float
    penalty_a: float = Field(..., ge=0)
    penalty_b: float = Field(..., ge=0)
    penalty_c: float = Field(..., ge=0)
    y: float = Field(..., ge=0, le=1000)
    zero_reason: ZeroReason = "none"

    @model_validator(mode="after")
    def check_zero_rule(self):
        if self.zero_reason != "none" and self.y != 0:
            raise ValueError("a zeroed score must have y = 0")
        return self

    @classmethod
    def failed(cls) -> "ScoreBreakdown":
        """Breakdown recorded for a case that raised."""
        return cls(
            theta_peak=0.0,
            pointing_error=0.0,
            theta1=0.0,
            theta2=180.0,
            open_left=True,
            open_right=True,
            W=180.0,
            penalty_a=0.0,
            penalty_b=0.0,
            penalty_c=0.0,
            y=0.0,
            zero_reason="failure",
        )


class ExcitationRecord(BaseModel):
    phases: List[float]
    amplitudes: List[float]

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.phases) != len(self.amplitudes):
            raise ValueError("phases and amplitudes must have equal length")
        if any(b < 0.0 or b > 1.0 for b in self.amplitudes):
            raise ValueError("amplitudes must lie in [0, 1]")
        return self

    @classmethod
    def from_excitation(cls, excitation: Excitation) -> "ExcitationRecord":
        return cls(**excitation.to_dict())

    def to_excitation(self) -> Excitation:
        return Excitation(np.asarray(self.phases), np.asarray(self.amplitudes))


class CaseResult(BaseModel):
    """Outcome of one case, as written to `<case_id>.json`."""

    case_id: str
    theta0: float
    bits: int
    amp_opt: bool
    excitation: ExcitationRecord
    breakdown: ScoreBreakdown
    elapsed_seconds: float = Field(..., ge=0)
    branch_provenance: str
    config_fingerprint: str
    candidates_evaluated: int = Field(0, ge=0)
    error: Optional[str] = None

    @model_validator(mode="after")
    def check_excitation(self):
        step = 2.0 * np.pi / (1 << self.bits)
        index = np.asarray(self.excitation.phases) / step
        if np.any(np.abs(index - np.round(index)) > GRID_TOLERANCE):
            raise ValueError(f"phases are not on the {1 << self.bits}-point grid")
        if not self.amp_opt and any(b != 1.0 for b in self.excitation.amplitudes):
            raise ValueError("amplitudes must all be 1 when amp_opt is false")
        return self

    @property
    def y(self) -> float:
        return self.breakdown.y


class ScoreSummary(BaseModel):
    """Batch statistics written by the `score` command."""

    cases: Dict[str, ScoreBreakdown]
    mean: float
    total: float
    success_rate: float
    per_bits_mean: Dict[int, float]
