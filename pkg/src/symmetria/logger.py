"""Logging utilities for symmetria.

Contains `RunLogger` for structured run output and `LoggedSymmetryDetector`,
a subclass that records every pipeline stage through it.
"""
from __future__ import annotations

import logging
from datetime import datetime
from time import perf_counter
from typing import Optional

from .detector import DetectionResult, SymmetryDetector
from .mesh import TriangleMesh

__all__ = ["RunLogger", "LoggedSymmetryDetector", "LOG_FORMAT"]

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class RunLogger:
    """Write pipeline stages to stderr and, optionally, a log file."""

    def __init__(self, log_file: Optional[str] = None, verbose: bool = False) -> None:
        handlers: list[logging.Handler] = [logging.StreamHandler()]
        if log_file:
            handlers.append(logging.FileHandler(log_file))
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT, handlers=handlers, force=True)
        logging.getLogger("symmetria").setLevel(logging.DEBUG if verbose else logging.INFO)
        self.logger = logging.getLogger("symmetria.run")

    def log_stage(self, stage: str, mesh_id: str, success: bool, details: str | None = None) -> None:
        status = "SUCCESS" if success else "FAILED"
        msg = f"[{datetime.now().isoformat()}] {stage.upper()} - {mesh_id} - {status}"
        if details:
            msg += f" - {details}"
        (self.logger.info if success else self.logger.error)(msg)


class LoggedSymmetryDetector(SymmetryDetector):
    """SymmetryDetector that reports each stage and the total run via RunLogger."""

    def __init__(self, *args, run_logger: Optional[RunLogger] = None, **kwargs):  # noqa: ANN002, ANN003
        super().__init__(*args, **kwargs)
        self._logger = run_logger or RunLogger(verbose=self.config.verbose)

    def on_stage(self, stage: str, mesh_id: str, success: bool, seconds: float, error: Optional[str]) -> None:
        details = f"{seconds:.3f}s" if success else f"{seconds:.3f}s - {error}"
        self._logger.log_stage(stage, mesh_id, success, details)

    def detect(self, mesh: TriangleMesh, mesh_id: str = "") -> DetectionResult:  # type: ignore[override]
        start = perf_counter()
        result = super().detect(mesh, mesh_id)
        self._logger.log_stage(
            "DETECT", mesh_id, True, f"{perf_counter() - start:.2f}s, n={mesh.n}, pairs={result.pairs.c}"
        )
        return result
