"""Correspondence-rate metrics against ground-truth symmetric pairs.

A ground-truth pair ``(j, j'_g)`` is a true positive when the detected
partner ``sigma(j)`` lies within ``sqrt(area / (20 pi))`` of ``j'_g`` along the
mesh edge graph.
"""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import thread_limit
from .errors import EmptyGroundTruthError, ParseError, ValidationError
from .geodesics import pairwise_geodesic
from .mesh import TriangleMesh, surface_area

logger = logging.getLogger(__name__)

__all__ = [
    "EvalReport",
    "DatasetEntry",
    "threshold",
    "correspondence_rate",
    "mesh_rate",
    "read_ground_truth",
    "evaluate_dataset",
    "write_summary_csv",
    "PASS_RATE",
]

PASS_RATE = 0.75


@dataclass(frozen=True)
class EvalReport:
    per_pair_error: np.ndarray
    threshold: float
    corr_rate: float
    runtime_seconds: float = 0.0
    name: str = ""

    @property
    def n_pairs(self) -> int:
        return int(self.per_pair_error.shape[0])

    @property
    def true_positives(self) -> int:
        return int(np.sum(self.per_pair_error < self.threshold))

    def to_dict(self) -> dict:
        finite = self.per_pair_error[np.isfinite(self.per_pair_error)]
        return {
            "name": self.name,
            "n_pairs": self.n_pairs,
            "true_positives": self.true_positives,
            "corr_rate": self.corr_rate,
            "threshold": self.threshold,
            "mean_error": float(finite.mean()) if finite.size else None,
            "max_error": float(finite.max()) if finite.size else None,
            "runtime_seconds": self.runtime_seconds,
            "geodesics": "edge-graph dijkstra",
        }


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    mesh: TriangleMesh
    sigma: np.ndarray
    ground_truth: np.ndarray = field(repr=False)


def threshold(mesh: TriangleMesh) -> float:
    return float(np.sqrt(surface_area(mesh) / (20.0 * np.pi)))


def correspondence_rate(
    mesh: TriangleMesh, sigma: np.ndarray, ground_truth, *, name: str = ""
) -> EvalReport:
    """Fraction of ground-truth pairs whose detected partner is within the threshold."""
    start = time.perf_counter()
    gt = np.asarray(ground_truth, dtype=np.int64).reshape(-1, 2)
    if gt.shape[0] == 0:
        raise EmptyGroundTruthError("ground truth contains no pairs")
    sigma = np.asarray(sigma, dtype=np.int64)
    n = mesh.n
    if sigma.shape != (n,):
        raise ValidationError(f"sigma has {sigma.shape[0]} entries for {n} vertices")
    if gt.min() < 0 or gt.max() >= n:
        raise ValidationError(f"ground-truth index out of range [0, {n})")
    tau = threshold(mesh)
    # distances beyond the threshold only need to be known to be too far
    errors = pairwise_geodesic(mesh, gt[:, 1], sigma[gt[:, 0]], limit=tau * 1.0001)
    rate = float(np.mean(errors < tau))
    report = EvalReport(
        per_pair_error=errors,
        threshold=tau,
        corr_rate=rate,
        runtime_seconds=time.perf_counter() - start,
        name=name,
    )
    logger.info("%s corr_rate=%.4f (%d/%d, threshold %.4g)",
                name or "mesh", rate, report.true_positives, report.n_pairs, tau)
    return report


def mesh_rate(reports: Sequence) -> float:
    """Fraction of reports (or raw rates) strictly above 75%."""
    if len(reports) == 0:
        raise ValueError("mesh_rate needs at least one report")
    rates = [r.corr_rate if isinstance(r, EvalReport) else float(r) for r in reports]
    return float(np.mean([r > PASS_RATE for r in rates]))


def read_ground_truth(path: str | Path, one_based: bool = False, n: Optional[int] = None) -> np.ndarray:
    """``m x 2`` array of ``(j, j'_g)`` pairs; blank and ``#`` lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except (IndexError, ValueError) as exc:
            raise ParseError(f"expected 'j j_prime', got {line!r}", path=str(path), line=lineno) from exc
        pairs.append((a, b))
    if not pairs:
        raise EmptyGroundTruthError(f"{path}: no ground-truth pairs")
    gt = np.array(pairs, dtype=np.int64)
    if one_based:
        gt -= 1
    if gt.min() < 0 or (n is not None and gt.max() >= n):
        raise ValidationError(f"ground-truth index out of range (one_based={one_based})", element=str(path))
    return gt


def evaluate_dataset(
    entries: Iterable[DatasetEntry], workers: Optional[int] = None
) -> tuple[list[EvalReport], float]:
    """Evaluate every entry on a thread pool; reports keep the input order."""
    entries = list(entries)
    if not entries:
        raise ValueError("empty dataset")
    workers = min(workers or thread_limit(), len(entries))
    logger.info("Evaluating %d meshes with %d workers", len(entries), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(
            pool.map(lambda e: correspondence_rate(e.mesh, e.sigma, e.ground_truth, name=e.name), entries)
        )
    rate = mesh_rate(reports)
    logger.info("mesh_rate=%.4f over %d meshes", rate, len(reports))
    return reports, rate


def write_summary_csv(reports: Sequence[EvalReport], path: str | Path) -> Path:
    path = Path(path)
    columns = ["name", "n_pairs", "true_positives", "corr_rate", "threshold", "mean_error", "max_error", "runtime_seconds"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for report in reports:
            writer.writerow(report.to_dict())
    return path
