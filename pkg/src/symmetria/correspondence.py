"""Dense symmetric correspondence from the corrected spectral embedding."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .correction import RotationCorrection
from .errors import DegenerateMapError, ParseError, ValidationError
from .functional_map import FunctionalMap
from .geodesics import pairwise_geodesic
from .mesh import TriangleMesh
from .spectral import SpectralBasis

logger = logging.getLogger(__name__)

__all__ = [
    "SymmetryMap",
    "embed",
    "nearest_neighbor_map",
    "brute_force_nearest",
    "involution_diagnostics",
    "write_correspondence",
    "read_correspondence",
]


@dataclass(frozen=True)
class SymmetryMap:
    sigma: np.ndarray
    nn_distance: np.ndarray
    involution_error: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.sigma.shape[0])

    def with_involution_error(self, error: np.ndarray) -> "SymmetryMap":
        return SymmetryMap(self.sigma, self.nn_distance, error)


def embed(
    basis: SpectralBasis,
    fmap: FunctionalMap,
    rotation: Optional[RotationCorrection] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Source ``R^T Phi^T`` and its reflection ``C R^T Phi^T`` on the active columns."""
    active = fmap.active
    if active.size < 3:
        raise DegenerateMapError(f"embedding needs at least 3 active eigenfunctions, got {active.size}")
    phi = basis.phi[:, active]
    if rotation is None:
        source = phi.T.copy()
    else:
        if rotation.R.shape != (active.size, active.size):
            raise DegenerateMapError(
                f"rotation is {rotation.R.shape}, expected {active.size}x{active.size}"
            )
        source = rotation.R.T @ phi.T
    target = fmap.sign[active].astype(np.float64)[:, np.newaxis] * source
    return source, target


def nearest_neighbor_map(
    source: np.ndarray, target: np.ndarray, *, workers: int = 1
) -> SymmetryMap:
    """For every source column the closest target column (k-d tree, ties to lower index)."""
    if source.shape != target.shape:
        raise ValidationError(f"embedding shapes differ: {source.shape} vs {target.shape}")
    n = source.shape[1]
    tree = cKDTree(target.T)
    if n == 1:
        return SymmetryMap(np.zeros(1, dtype=np.int64), np.zeros(1))
    dist, idx = tree.query(source.T, k=2, workers=workers)
    sigma = idx[:, 0].astype(np.int64)
    # the tree does not order exact ties; keep the lower index
    tie = (dist[:, 1] == dist[:, 0]) & (idx[:, 1] < idx[:, 0])
    sigma[tie] = idx[tie, 1]
    logger.debug("Nearest-neighbour map: %d ties resolved, max distance %.3g", int(tie.sum()), dist[:, 0].max())
    return SymmetryMap(sigma=sigma, nn_distance=dist[:, 0].copy())


def brute_force_nearest(source: np.ndarray, target: np.ndarray) -> SymmetryMap:
    """Exhaustive ``O(n^2)`` oracle for :func:`nearest_neighbor_map`."""
    dist = cdist(source.T, target.T)
    sigma = np.argmin(dist, axis=1)
    return SymmetryMap(sigma=sigma.astype(np.int64), nn_distance=dist[np.arange(dist.shape[0]), sigma])


def involution_diagnostics(mesh: TriangleMesh, sigma: np.ndarray) -> np.ndarray:
    """Geodesic distance between ``j`` and ``sigma(sigma(j))`` for every vertex."""
    sigma = np.asarray(sigma, dtype=np.int64)
    return pairwise_geodesic(mesh, np.arange(sigma.shape[0]), sigma[sigma])


# ───────────────────────────── Files ─────────────────────────────
def write_correspondence(smap: SymmetryMap, path: str | Path, k: int) -> Path:
    """``# n=<n> k=<k'>`` header, then one ``j sigma(j)`` line per vertex (0-based)."""
    path = Path(path)
    lines = [f"# n={smap.n} k={k}"]
    lines += [f"{j} {s}" for j, s in enumerate(smap.sigma.tolist())]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_correspondence(path: str | Path, n: Optional[int] = None) -> np.ndarray:
    """Parse a correspondence file into ``sigma``; ``n`` checks the vertex count."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    entries: dict[int, int] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            j, s = int(tokens[0]), int(tokens[1])
        except (IndexError, ValueError) as exc:
            raise ParseError(f"expected 'j sigma(j)', got {line!r}", path=str(path), line=lineno) from exc
        entries[j] = s
    size = n if n is not None else len(entries)
    sigma = np.full(size, -1, dtype=np.int64)
    for j, s in entries.items():
        if not (0 <= j < size and 0 <= s < size):
            raise ValidationError(f"correspondence {j} -> {s} out of range [0, {size})", element=str(path))
        sigma[j] = s
    if np.any(sigma < 0):
        missing = int(np.flatnonzero(sigma < 0)[0])
        raise ValidationError(f"no correspondence for vertex {missing}", element=str(path))
    return sigma
