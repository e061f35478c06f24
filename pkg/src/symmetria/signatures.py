"""Heat kernel signatures and HKS feature points."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DegenerateSpectrumError, NoFeaturesError
from .mesh import AdjacencyIndex, TriangleMesh
from .spectral import SpectralBasis

logger = logging.getLogger(__name__)

__all__ = [
    "FeatureSet",
    "hks_energy",
    "hks_descriptors",
    "reference_time",
    "time_samples",
    "detect_features",
    "local_maxima",
    "sign_matrix",
    "sign_agreement",
    "LN10x4",
]

LN10x4 = 4.0 * np.log(10.0)


@dataclass(frozen=True)
class FeatureSet:
    """HKS feature points.

    ``indices`` are vertex indices (ascending), ``H`` is ``h x d`` (one HKS
    column per feature), ``S`` is ``k x d`` with entries in ``{-1, +1}``.
    """

    indices: np.ndarray
    H: np.ndarray
    S: np.ndarray
    t_h: float
    time_samples: np.ndarray
    energy: np.ndarray

    @property
    def d(self) -> int:
        return int(self.indices.shape[0])

    def to_dict(self) -> dict:
        return {
            "indices": self.indices.tolist(),
            "t_h": self.t_h,
            "time_samples": self.time_samples.tolist(),
            "energy": self.energy.tolist(),
            "H": self.H.tolist(),
            "S": self.S.astype(int).tolist(),
        }


def hks_energy(basis: SpectralBasis, t: float) -> np.ndarray:
    """``sum_i exp(-lambda_i t) phi_i(x)^2`` at every vertex."""
    if t <= 0:
        raise ValueError(f"diffusion time must be positive, got {t}")
    return (basis.phi ** 2) @ np.exp(-basis.eigenvalues * t)


def hks_descriptors(basis: SpectralBasis, times: np.ndarray) -> np.ndarray:
    """``n x h`` matrix of HKS values, one column per diffusion time."""
    times = np.asarray(times, dtype=np.float64)
    return (basis.phi ** 2) @ np.exp(-np.outer(basis.eigenvalues, times))


def reference_time(basis: SpectralBasis) -> float:
    """``t_h = 4 ln 10 / lambda_2``."""
    lam = basis.sorted_eigenvalues()
    if lam.shape[0] < 2 or lam[1] <= 1e-12:
        raise DegenerateSpectrumError(
            f"second eigenvalue must be positive to set the HKS time (got {lam[1] if lam.shape[0] > 1 else None})"
        )
    return float(LN10x4 / lam[1])


def time_samples(basis: SpectralBasis, h: int = 50) -> np.ndarray:
    """``h`` log-uniform times on ``[4 ln 10 / lambda_k, 4 ln 10 / lambda_2]``."""
    lam = basis.sorted_eigenvalues()
    t_max = reference_time(basis)
    t_min = LN10x4 / lam[-1]
    return np.geomspace(t_min, t_max, num=h)


def sign_matrix(basis: SpectralBasis, vertices: np.ndarray) -> np.ndarray:
    """``k x len(vertices)`` eigenfunction signs; exact zeros count as +1."""
    s = np.sign(basis.phi[np.asarray(vertices)].T)
    s[s == 0] = 1.0
    return s


def _two_ring(adjacency: AdjacencyIndex) -> sparse.csr_matrix:
    n = len(adjacency.one_ring)
    lengths = np.fromiter((len(r) for r in adjacency.one_ring), dtype=np.int64, count=n)
    rows = np.repeat(np.arange(n), lengths)
    cols = np.concatenate(adjacency.one_ring)
    adj = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ring2 = (adj + adj @ adj).tocsr()
    ring2.setdiag(0)
    ring2.eliminate_zeros()
    ring2.sort_indices()
    return ring2


def local_maxima(adjacency: AdjacencyIndex, values: np.ndarray) -> np.ndarray:
    """Ascending vertices that are maxima of ``values`` over their 2-ring.

    A vertex qualifies when no 2-ring neighbour is larger, every lower-indexed
    neighbour is strictly smaller and at least one neighbour is strictly
    smaller. Equal peaks therefore go to the lowest index and plateaus yield
    nothing.
    """
    values = np.asarray(values, dtype=np.float64)
    ring2 = _two_ring(adjacency)
    n = ring2.shape[0]
    rows = np.repeat(np.arange(n), np.diff(ring2.indptr))
    nb = ring2.indices
    mine, theirs = values[rows], values[nb]
    above = np.bincount(rows[theirs > mine], minlength=n)
    tied_lower = np.bincount(rows[(theirs == mine) & (nb < rows)], minlength=n)
    below = np.bincount(rows[theirs < mine], minlength=n)
    return np.flatnonzero((above == 0) & (tied_lower == 0) & (below > 0))


def detect_features(
    mesh: TriangleMesh,
    adjacency: AdjacencyIndex,
    basis: SpectralBasis,
    d_max: int = 25,
    h: int = 50,
) -> FeatureSet:
    """Local maxima of the HKS energy at ``t_h`` over 2-ring neighbourhoods.

    When more than ``d_max`` maxima exist the ``d_max`` most energetic are
    kept (equal energies resolved by lower vertex index).
    """
    if d_max < 2:
        raise ValueError("d_max must be >= 2")
    t_h = reference_time(basis)
    energy = hks_energy(basis, t_h)
    maxima = local_maxima(adjacency, energy)
    if maxima.size == 0:
        raise NoFeaturesError("HKS energy has no local maximum over 2-rings")

    if maxima.size > d_max:
        ranked = maxima[np.lexsort((maxima, -energy[maxima]))]
        logger.debug("Keeping %d of %d HKS maxima", d_max, maxima.size)
        maxima = np.sort(ranked[:d_max])

    times = time_samples(basis, h)
    H = hks_descriptors(basis, times)[maxima].T
    S = sign_matrix(basis, maxima)
    logger.info("Detected %d HKS feature points (t_h=%.6g)", maxima.size, t_h)
    return FeatureSet(
        indices=maxima, H=H, S=S, t_h=t_h, time_samples=times, energy=energy[maxima]
    )


def sign_agreement(mesh: TriangleMesh, basis: SpectralBasis, k: int = 13) -> float:
    """Mean fraction of matching eigenfunction signs across mesh edges.

    Uses the ``k`` lowest eigenfunctions; values near 1 mean nodal sets are
    sparse at this resolution.
    """
    order = np.argsort(basis.eigenvalues, kind="stable")[:k]
    s = np.sign(basis.phi[:, order])
    s[s == 0] = 1.0
    e = mesh.edge_list
    return float(np.mean(s[e[:, 0]] == s[e[:, 1]]))
