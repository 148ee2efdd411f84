"""
Logging configuration and utilities.
"""
import logging
import logging.config
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

DEFAULT_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def logging_config(
    log_level: str = "INFO",
    log_format: Optional[str] = None,
    log_file: Optional[str] = None,
) -> Dict[str, Any]:
    """
    dictConfig schema for the root logger: stderr always, plus a file when given.

    stdout stays free for command output.
    """
    handlers: Dict[str, Dict[str, Any]] = {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
            "stream": "ext://sys.stderr",
        }
    }
    if log_file:
        handlers["file"] = {
            "class": "logging.FileHandler",
            "formatter": "plain",
            "filename": log_file,
            "encoding": "utf-8",
        }
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"plain": {"format": log_format or DEFAULT_LOG_FORMAT}},
        "handlers": handlers,
        "root": {"level": log_level.upper(), "handlers": list(handlers)},
    }


def setup_logging(
    log_level: str = "INFO",
    log_format: Optional[str] = None,
    log_file: Optional[str] = None
) -> None:
    """
    Configure application logging.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_format: Custom log format string
        log_file: Path to log file (if None, logs to console only)
    """
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    logging.config.dictConfig(logging_config(log_level, log_format, log_file))
    logging.info(f"Logging initialized at {datetime.now().isoformat()}")


class StageLogger:
    """
    Per-case logger that times pipeline stages and records their outcome.
    """

    def __init__(self, case_id: str, logger_name: str = "beamsynth.stages"):
        """
        Initialize stage logger.

        Args:
            case_id: Identifier of the case being optimized
            logger_name: Logger name
        """
        self.case_id = case_id
        self.logger = logging.getLogger(logger_name)
        self.durations: Dict[str, float] = {}
        self._started: Dict[str, float] = {}

    def start(self, stage: str) -> None:
        """Mark the beginning of a stage."""
        self._started[stage] = time.monotonic()
        self.logger.debug(f"[{self.case_id}] {stage}: started")

    def finish(
        self,
        stage: str,
        candidates: Optional[int] = None,
        best_score: Optional[float] = None,
    ) -> float:
        """
        Close a stage and log its duration and outcome.

        Args:
            stage: Stage name passed to start()
            candidates: Number of candidates the stage produced
            best_score: Best score seen so far

        Returns:
            Stage duration in seconds
        """
        began = self._started.pop(stage, time.monotonic())
        elapsed = time.monotonic() - began
        self.durations[stage] = elapsed

        message = f"[{self.case_id}] {stage}: {elapsed:.3f}s"
        if candidates is not None:
            message += f" | Candidates: {candidates}"
        if best_score is not None:
            message += f" | Best: {best_score:.2f}"

        self.logger.info(message)
        return elapsed

    def skip(self, stage: str, reason: str) -> None:
        """Log a stage that was not run."""
        self.logger.warning(f"[{self.case_id}] {stage}: skipped ({reason})")
