"""
Run configuration: defaults, a TOML file, `.env` and `BEAM_*` environment variables.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Annotated, Any, List, Optional, Tuple, Type, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import (
    BaseSettings,
    NoDecode,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from beamsynth.array_model import DEFAULT_N_ANTENNAS, SCORING_STEP_DEG
from beamsynth.encoding import DEFAULT_AMP_BITS
from beamsynth.errors import ConfigError
from beamsynth.gradient import AdamConfig
from beamsynth.ising_build import NEAR_BAND_DEG, SidelobeConfig
from beamsynth.refine import DEFAULT_REFINE_M
from beamsynth.scoring import TIME_LIMIT_SECONDS
from beamsynth.solvers.base import KIND_ORDER, SolverConfig, SolverKind
from beamsynth.utils.logging import DEFAULT_LOG_FORMAT

logger = logging.getLogger(__name__)

DEFAULT_BUDGET_SECONDS = 90.0
DEFAULT_CANDIDATE_CAP = 64
DEFAULT_CLASSICAL_RESTARTS = 4
FINGERPRINT_EXCLUDE = {"threads", "log_level", "log_format", "log_file"}


class ObjectiveSettings(BaseModel):
    """Sidelobe sampling and weighting shared by the Ising builders and the ratio loss."""

    guard_halfwidth: float = Field(5.0, ge=0, description="Excluded half-width around θ₀ in degrees")
    sample_step: float = Field(1.0, gt=0, description="Sidelobe sampling step in degrees")
    near_weight: float = Field(10.0, gt=0, description="Weight of samples within the near band")
    far_weight: float = Field(1.0, gt=0, description="Weight of samples outside the near band")
    blend_weight: float = Field(0.5, gt=0, lt=1, description="Sidelobe versus mainlobe mix")
    near_band: float = Field(NEAR_BAND_DEG, gt=0, description="Near-band half-width in degrees")

    @model_validator(mode="after")
    def check_guard(self):
        if self.guard_halfwidth >= self.near_band:
            raise ValueError("guard_halfwidth must be smaller than near_band")
        return self

    def for_target(self, theta0: float) -> SidelobeConfig:
        return SidelobeConfig(theta0=theta0, **self.model_dump())


class BudgetSplit(BaseModel):
    """Fractions of the case budget given to each stage."""

    phase_solve: float = Field(0.5, ge=0, le=1)
    amplitude_solve: float = Field(0.2, ge=0, le=1)
    gradient_branch: float = Field(0.15, ge=0, le=1)
    refine_eval: float = Field(0.15, ge=0, le=1)

    @model_validator(mode="after")
    def check_total(self):
        total = self.phase_solve + self.amplitude_solve + self.gradient_branch + self.refine_eval
        if total > 1.0 + 1e-9:
            raise ValueError(f"budget fractions sum to {total:.3f}, more than 1")
        return self


class BranchSettings(BaseModel):
    """Which optimization branches run."""

    quantum: bool = True
    classical: bool = True

    @model_validator(mode="after")
    def check_any(self):
        if not (self.quantum or self.classical):
            raise ValueError("at least one branch must be enabled")
        return self


def _amplitude_solver_default() -> SolverConfig:
    return SolverConfig(batch_size=16, iterations=300)


class RunConfig(BaseSettings):
    """All parameters of a batch run."""

    budget_seconds: float = Field(DEFAULT_BUDGET_SECONDS, gt=0, description="Wall-clock budget per case")
    split: BudgetSplit = Field(default_factory=BudgetSplit)
    n_antennas: int = Field(DEFAULT_N_ANTENNAS, ge=1, description="Array size")
    amp_bits: int = Field(DEFAULT_AMP_BITS, ge=1, le=8, description="Amplitude spins per antenna")
    objective: ObjectiveSettings = Field(default_factory=ObjectiveSettings)
    phase_solver: SolverConfig = Field(default_factory=SolverConfig)
    amplitude_solver: SolverConfig = Field(default_factory=_amplitude_solver_default)
    enabled_kinds: Annotated[List[SolverKind], NoDecode] = Field(default_factory=lambda: list(KIND_ORDER))
    refine_m: int = Field(DEFAULT_REFINE_M, ge=1, description="Phase candidates kept after clustering")
    classical_restarts: int = Field(DEFAULT_CLASSICAL_RESTARTS, ge=0, description="Gradient restarts per case")
    adam: AdamConfig = Field(default_factory=AdamConfig)
    candidate_cap: int = Field(DEFAULT_CANDIDATE_CAP, ge=1, description="Excitations scored per case")
    score_step: float = Field(SCORING_STEP_DEG, gt=0, description="Scoring grid step in degrees")
    time_limit: float = Field(TIME_LIMIT_SECONDS, gt=0, description="Zero-rule time limit in seconds")
    branches: BranchSettings = Field(default_factory=BranchSettings)
    seed: int = Field(0, ge=0, description="Master seed")

    # Execution and logging settings; these never change results
    threads: Optional[int] = Field(None, ge=1, description="Worker cap for solver kinds")
    log_level: str = Field("INFO", description="Logging level")
    log_format: str = Field(DEFAULT_LOG_FORMAT, description="Log format string")
    log_file: Optional[str] = Field(None, description="Optional log file path")

    model_config = SettingsConfigDict(
        env_prefix="BEAM_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            TomlConfigSettingsSource(settings_cls),
        )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of {allowed_levels}")
        return v.upper()

    @field_validator("enabled_kinds", mode="before")
    @classmethod
    def parse_enabled_kinds(cls, v):
        """Accept a comma-separated string as well as a list."""
        if isinstance(v, str):
            try:
                parsed = json.loads(v)
                if isinstance(parsed, list):
                    return parsed
            except json.JSONDecodeError:
                pass
            return [s.strip() for s in v.split(",") if s.strip()]
        return v

    @field_validator("enabled_kinds")
    @classmethod
    def validate_enabled_kinds(cls, v):
        """Keep run order canonical and reject an empty selection."""
        if not v:
            raise ValueError("enabled_kinds must name at least one solver")
        return [kind for kind in KIND_ORDER if kind in set(v)]

    def fingerprint(self) -> str:
        """16 hex digits identifying every result-affecting parameter."""
        payload = self.model_dump(mode="json", exclude=FINGERPRINT_EXCLUDE)
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """
    Load and validate a run configuration.

    Args:
        path: Optional TOML file
        **overrides: Field values that win over every other source

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: If the file is missing or validation fails
    """
    settings_cls: Type[RunConfig] = RunConfig
    if path is not None:
        toml_path = Path(path)
        if not toml_path.is_file():
            logger.error(f"Failed to load configuration: {toml_path} not found")
            raise ConfigError(f"configuration file not found: {toml_path}")

        class FileRunConfig(RunConfig):
            model_config = SettingsConfigDict(toml_file=str(toml_path))

        settings_cls = FileRunConfig

    try:
        config = settings_cls(**overrides)
    except (ValidationError, ValueError) as e:
        error_msg = f"Failed to load configuration: {str(e)}"
        logger.error(error_msg)
        raise ConfigError(error_msg) from e

    logger.info(
        f"Loaded run configuration {config.fingerprint()}: budget {config.budget_seconds}s, "
        f"{config.n_antennas} antennas, kinds {[kind.value for kind in config.enabled_kinds]}"
    )
    return config
