"""Pairing of HKS feature points into candidate intrinsically symmetric pairs.

The symmetric assignment problem over ``Pi`` is solved in its unordered-pair
form: pick ``c`` disjoint pairs ``{j, j'}`` of minimum total cost
``sum 2 W[j, j']``. The exact solver is a depth-first branch and bound that
enumerates matchings in lexicographic order, seeded with a greedy upper bound
and pruned with a linear assignment relaxation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import DimensionError, InfeasibleError
from .signatures import FeatureSet

logger = logging.getLogger(__name__)

__all__ = [
    "AffinityMatrix",
    "PairSet",
    "build_affinity",
    "default_pair_count",
    "solve_assignment",
    "brute_force_assignment",
    "greedy_assignment",
]

Pair = tuple[int, int]


@dataclass(frozen=True)
class AffinityMatrix:
    W: np.ndarray
    q: float

    @property
    def d(self) -> int:
        return int(self.W.shape[0])


@dataclass(frozen=True)
class PairSet:
    """``c`` disjoint unordered pairs of feature positions, each stored ``(j, j')`` with ``j < j'``."""

    pairs: tuple[Pair, ...]
    total_cost: float

    @property
    def c(self) -> int:
        return len(self.pairs)

    def as_matrix(self, d: int) -> np.ndarray:
        """Symmetric 0/1 matrix ``Pi``."""
        pi = np.zeros((d, d), dtype=np.int64)
        for a, b in self.pairs:
            pi[a, b] = pi[b, a] = 1
        return pi

    def vertex_pairs(self, features: FeatureSet) -> list[tuple[int, int]]:
        idx = features.indices
        return [(int(idx[a]), int(idx[b])) for a, b in self.pairs]


def build_affinity(
    features: FeatureSet, q: Optional[float] = None, *, q_multiplier: float = 1000.0
) -> AffinityMatrix:
    """``W[j, j'] = |h_j - h_j'| + q * [s_j == s_j']``, ``W[j, j] = q``.

    When ``q`` is omitted it is ``q_multiplier`` times the largest pairwise HKS
    distance, which makes the equal-sign penalty dominate.
    """
    if features.d < 2:
        raise InfeasibleError(f"need at least 2 features to pair, got {features.d}")
    hks_dist = cdist(features.H.T, features.H.T)
    same_sign = cdist(features.S.T, features.S.T) == 0
    max_dist = float(hks_dist.max())
    if q is None:
        q = q_multiplier * (max_dist if max_dist > 0 else 1.0)
    elif q <= max_dist:
        logger.warning("q=%.3g does not exceed the largest HKS distance %.3g", q, max_dist)
    W = hks_dist + q * same_sign
    np.fill_diagonal(W, q)
    return AffinityMatrix(W=W, q=float(q))


def default_pair_count(d: int, cap: int = 8) -> int:
    return min(cap, d // 2)


def _check(W: np.ndarray, c: int) -> int:
    d = W.shape[0]
    if c < 1:
        raise InfeasibleError(f"c must be positive, got {c}")
    if 2 * c > d:
        raise InfeasibleError(f"cannot form {c} disjoint pairs from {d} features")
    return d


def _pair_cost(W: np.ndarray, pairs) -> float:
    return float(sum(W[a, b] + W[b, a] for a, b in pairs))


def greedy_assignment(W: np.ndarray, c: int) -> PairSet:
    """Repeatedly take the cheapest pair among unused features."""
    W = np.asarray(W, dtype=np.float64)
    d = _check(W, c)
    cand = sorted(((W[a, b] + W[b, a], a, b) for a, b in combinations(range(d), 2)))
    used: set[int] = set()
    pairs: list[Pair] = []
    for _, a, b in cand:
        if a in used or b in used:
            continue
        pairs.append((a, b))
        used.update((a, b))
        if len(pairs) == c:
            break
    pairs.sort()
    return PairSet(tuple(pairs), _pair_cost(W, pairs))


def _assignment_bound(cost: np.ndarray, free: np.ndarray, remaining: int) -> float:
    """Relaxation of ``remaining`` disjoint pairs among ``free`` vertices.

    Every free vertex is sent to a distinct other free vertex at half the
    pair cost, or to one of ``m - 2r`` zero-cost dummies. A matching sends
    both ends of each pair to each other, so this never exceeds its cost.
    """
    m = free.size
    if m < 2 * remaining:
        return np.inf
    sub = 0.5 * cost[np.ix_(free, free)]
    np.fill_diagonal(sub, np.inf)
    full = np.hstack((sub, np.zeros((m, m - 2 * remaining))))
    rows, cols = linear_sum_assignment(full)
    return float(full[rows, cols].sum())


def solve_assignment(W, c: int) -> PairSet:
    """Exact minimum-cost set of ``c`` disjoint pairs.

    ``W`` may be an :class:`AffinityMatrix` or a square array. Among optimal
    solutions the lexicographically smallest sorted pair list is returned.
    """
    W = np.asarray(W.W if isinstance(W, AffinityMatrix) else W, dtype=np.float64)
    d = _check(W, c)
    cost = W + W.T

    greedy = greedy_assignment(W, c)
    best_cost = greedy.total_cost
    best_pairs: tuple[Pair, ...] = greedy.pairs
    slack = 1e-12 * (1.0 + abs(best_cost))
    nodes = 0

    def search(start: int, avail: np.ndarray, remaining: int, acc: float, chosen: list[Pair]) -> None:
        nonlocal best_cost, best_pairs, nodes
        nodes += 1
        if remaining == 0:
            candidate = tuple(chosen)
            if acc < best_cost - slack or (acc <= best_cost + slack and candidate < best_pairs):
                best_cost, best_pairs = acc, candidate
            return
        free = np.flatnonzero(avail[start:]) + start
        if free.size < 2 * remaining:
            return
        if acc + _assignment_bound(cost, free, remaining) > best_cost + slack:
            return
        v = int(free[0])
        avail[v] = False
        for u in free[1:].tolist():
            avail[u] = False
            chosen.append((v, u))
            search(v + 1, avail, remaining - 1, acc + cost[v, u], chosen)
            chosen.pop()
            avail[u] = True
        # leave v unmatched
        if free.size - 1 >= 2 * remaining:
            search(v + 1, avail, remaining, acc, chosen)
        avail[v] = True

    search(0, np.ones(d, dtype=bool), c, 0.0, [])
    logger.debug("Assignment d=%d c=%d solved with %d nodes, cost %.6g", d, c, nodes, best_cost)
    return PairSet(best_pairs, _pair_cost(W, best_pairs))


def brute_force_assignment(W, c: int) -> PairSet:
    """Exhaustive oracle for :func:`solve_assignment` (``d <= 10``)."""
    W = np.asarray(W.W if isinstance(W, AffinityMatrix) else W, dtype=np.float64)
    d = _check(W, c)
    if d > 10:
        raise DimensionError(f"brute force limited to d <= 10, got {d}")
    best: Optional[tuple[float, tuple[Pair, ...]]] = None

    def enumerate_matchings(start: int, used: frozenset, chosen: tuple[Pair, ...]):
        if len(chosen) == c:
            yield chosen
            return
        for a in range(start, d):
            if a in used:
                continue
            for b in range(a + 1, d):
                if b in used:
                    continue
                yield from enumerate_matchings(a + 1, used | {a, b}, chosen + ((a, b),))

    for matching in enumerate_matchings(0, frozenset(), ()):
        key = (_pair_cost(W, matching), matching)
        if best is None or key < best:
            best = key
    assert best is not None
    return PairSet(best[1], best[0])
