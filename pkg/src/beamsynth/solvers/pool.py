"""
Worker pool for running independent solver jobs.
"""
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


class SolverPool:
    """Runs solver jobs on a bounded thread pool and keeps health counters."""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max(1, max_workers or os.cpu_count() or 1)
        self.lock = threading.Lock()

        # Job metrics
        self.jobs_submitted = 0
        self.jobs_completed = 0
        self.jobs_failed = 0
        self.busy_seconds = 0.0
        self.last_error: Optional[str] = None

    def _timed(self, job: Callable[[], Any]) -> Any:
        start_time = time.monotonic()
        try:
            result = job()
            with self.lock:
                self.jobs_completed += 1
            return result
        except Exception as e:
            with self.lock:
                self.jobs_failed += 1
                self.last_error = str(e)
            logger.error(f"Solver job failed: {str(e)}")
            raise
        finally:
            with self.lock:
                self.busy_seconds += time.monotonic() - start_time

    def run(self, jobs: Sequence[Callable[[], Any]]) -> List[Any]:
        """
        Execute jobs and return their results in submission order.

        Args:
            jobs: Zero-argument callables

        Returns:
            Results, index-aligned with jobs
        """
        with self.lock:
            self.jobs_submitted += len(jobs)
        if self.max_workers == 1 or len(jobs) <= 1:
            return [self._timed(job) for job in jobs]

        with ThreadPoolExecutor(max_workers=min(self.max_workers, len(jobs))) as executor:
            futures = [executor.submit(self._timed, job) for job in jobs]
            return [future.result() for future in futures]

    def health_check(self) -> Dict[str, Any]:
        """Return counters describing the pool's work so far."""
        with self.lock:
            return {
                "max_workers": self.max_workers,
                "jobs_submitted": self.jobs_submitted,
                "jobs_completed": self.jobs_completed,
                "jobs_failed": self.jobs_failed,
                "busy_seconds": round(self.busy_seconds, 3),
                "last_error": self.last_error,
            }
