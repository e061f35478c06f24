"""Diagonal functional map of the self-symmetry.

Each eigenfunction with a simple eigenvalue is either even or odd under the
symmetry. The parity is read from its restriction to geodesics between
symmetric pairs: an even restriction is a palindrome, an odd one an
anti-palindrome, so ``p . flip(p)`` carries the sign.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateMapError
from .geodesics import GeodesicPath, restrict
from .pairing import PairSet
from .spectral import SpectralBasis

logger = logging.getLogger(__name__)

__all__ = [
    "FunctionalMap",
    "eigenfunction_sign",
    "vote_confidence",
    "build_functional_map",
]


@dataclass(frozen=True)
class FunctionalMap:
    """Diagonal of ``C`` as ``sign`` in ``{-1, 0, +1}``; 0 marks an excluded column."""

    sign: np.ndarray
    active: np.ndarray
    confidence: np.ndarray

    @property
    def C(self) -> np.ndarray:
        return np.diag(self.sign.astype(np.float64))

    @property
    def k(self) -> int:
        return int(self.sign.shape[0])


def _votes(basis: SpectralBasis, paths: Sequence[GeodesicPath], i: int) -> tuple[float, float]:
    total = 0.0
    norm = 0.0
    for path in paths:
        p = restrict(basis, path, i)
        total += float(p @ p[::-1])
        norm += float(p @ p)
    return total, norm


def eigenfunction_sign(
    basis: SpectralBasis, paths: Sequence[GeodesicPath], i: int, eps_sign: float = 1e-6
) -> int:
    """Parity of eigenfunction ``i`` summed over all pair geodesics.

    Returns 0 when the vote is too small relative to ``sum |p|^2`` to decide.
    """
    if not paths:
        raise ValueError("need at least one geodesic path")
    total, norm = _votes(basis, paths, i)
    if total == 0.0 or abs(total) < eps_sign * norm:
        return 0
    return 1 if total > 0 else -1


def vote_confidence(basis: SpectralBasis, paths: Sequence[GeodesicPath], i: int) -> float:
    """``|sum p . flip(p)| / sum |p|^2``; 1 for perfect (anti-)palindromes."""
    total, norm = _votes(basis, paths, i)
    return abs(total) / norm if norm > 0 else 0.0


def build_functional_map(
    basis: SpectralBasis,
    pairs: PairSet,
    paths: Sequence[GeodesicPath],
    gap_flags: Sequence[bool],
    *,
    eps_sign: float = 1e-6,
    min_active: int = 3,
) -> FunctionalMap:
    """Per-column parities; flagged (near-repeated) eigenvalues are excluded.

    The constant eigenfunction is always even.
    """
    if len(paths) != pairs.c:
        raise ValueError(f"{len(paths)} paths for {pairs.c} pairs")
    gap_flags = np.asarray(gap_flags, dtype=bool)
    k = basis.k
    sign = np.zeros(k, dtype=np.int64)
    confidence = np.zeros(k)
    for i in range(k):
        confidence[i] = vote_confidence(basis, paths, i)
        if not gap_flags[i]:
            sign[i] = eigenfunction_sign(basis, paths, i, eps_sign)
    sign[basis.constant_index] = 1
    active = np.flatnonzero((sign != 0) & ~gap_flags)
    logger.info("Functional map signs %s (%d active)", sign.tolist(), active.size)
    if active.size < min_active:
        raise DegenerateMapError(
            f"only {active.size} eigenfunctions with a decided parity (need {min_active})"
        )
    return FunctionalMap(sign=sign, active=active, confidence=confidence)
