"""Approximate geodesics on the mesh edge graph.

Paths run along mesh edges (Dijkstra with Euclidean edge weights), so
eigenfunctions can be restricted to them without interpolation.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import UnreachableError
from .mesh import AdjacencyIndex, TriangleMesh, edge_lengths
from .spectral import SpectralBasis

logger = logging.getLogger(__name__)

__all__ = [
    "GeodesicPath",
    "shortest_path",
    "restrict",
    "edge_graph",
    "geodesic_distances_from",
    "pairwise_geodesic",
]

# sources per csgraph.dijkstra call; bounds the (chunk x n) result matrix
_CHUNK = 128


@dataclass(frozen=True)
class GeodesicPath:
    vertex_seq: tuple[int, ...]
    length: float

    def __len__(self) -> int:
        return len(self.vertex_seq)

    def reversed(self) -> "GeodesicPath":
        return GeodesicPath(tuple(reversed(self.vertex_seq)), self.length)


def shortest_path(mesh: TriangleMesh, adjacency: AdjacencyIndex, src: int, dst: int) -> GeodesicPath:
    """Dijkstra over the edge graph from ``src`` to ``dst``.

    Equal tentative distances keep the smaller predecessor index, and the
    heap pops equal distances in vertex order, so the result is deterministic.
    """
    n = mesh.n
    if not (0 <= src < n and 0 <= dst < n):
        raise IndexError(f"vertex out of range: src={src} dst={dst} n={n}")
    if src == dst:
        raise ValueError("shortest_path needs distinct endpoints")
    pos = mesh.vertices
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    dist[src] = 0.0
    heap: list[tuple[float, int]] = [(0.0, src)]
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == dst:
            break
        ring = adjacency.one_ring[u]
        weights = np.linalg.norm(pos[ring] - pos[u], axis=1)
        for v, w in zip(ring.tolist(), weights.tolist()):
            if done[v]:
                continue
            nd = du + w
            if nd < dist[v] or (nd == dist[v] and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))

    if not done[dst]:
        raise UnreachableError(f"vertex {dst} unreachable from {src}")
    seq = [dst]
    while seq[-1] != src:
        seq.append(int(pred[seq[-1]]))
    seq.reverse()
    return GeodesicPath(tuple(seq), float(dist[dst]))


def restrict(basis: SpectralBasis, path: GeodesicPath, i: int) -> np.ndarray:
    """Values of eigenfunction column ``i`` (0-based) along ``path``."""
    if not 0 <= i < basis.k:
        raise IndexError(f"eigenfunction index {i} out of range [0, {basis.k})")
    return basis.phi[np.asarray(path.vertex_seq, dtype=np.int64), i]


# ───────────────────────────── Distance queries ─────────────────────────────
def edge_graph(mesh: TriangleMesh) -> sparse.csr_matrix:
    """Symmetric sparse matrix of Euclidean edge lengths."""
    e = mesh.edge_list
    w = edge_lengths(mesh)
    graph = sparse.coo_matrix((w, (e[:, 0], e[:, 1])), shape=(mesh.n, mesh.n))
    return (graph + graph.T).tocsr()


def geodesic_distances_from(
    mesh: TriangleMesh, src: int, *, graph: Optional[sparse.csr_matrix] = None
) -> np.ndarray:
    """Edge-graph distances from ``src`` to every vertex."""
    graph = edge_graph(mesh) if graph is None else graph
    return csgraph.dijkstra(graph, directed=False, indices=int(src))


def pairwise_geodesic(
    mesh: TriangleMesh,
    sources: Sequence[int],
    targets: Sequence[int],
    *,
    limit: Optional[float] = None,
    graph: Optional[sparse.csr_matrix] = None,
) -> np.ndarray:
    """Distance between ``sources[m]`` and ``targets[m]`` for every ``m``.

    Identical endpoints cost nothing; the remaining sources are grouped and
    solved in chunks. With ``limit`` the search stops early and farther pairs
    come back as ``inf``.
    """
    sources = np.asarray(sources, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    out = np.zeros(sources.shape[0])
    todo = np.flatnonzero(sources != targets)
    if todo.size == 0:
        return out
    graph = edge_graph(mesh) if graph is None else graph
    unique_src, inverse = np.unique(sources[todo], return_inverse=True)
    kwargs = {} if limit is None else {"limit": float(limit)}
    for start in range(0, unique_src.size, _CHUNK):
        chunk = unique_src[start : start + _CHUNK]
        dist = csgraph.dijkstra(graph, directed=False, indices=chunk, **kwargs)
        sel = np.flatnonzero((inverse >= start) & (inverse < start + chunk.size))
        rows = inverse[sel] - start
        out[todo[sel]] = dist[rows, targets[todo[sel]]]
    logger.debug("Geodesic distances for %d pairs (%d sources)", todo.size, unique_src.size)
    return out
