"""Synthetic meshes with a known reflective symmetry.

All mirrored generators share one latitude/longitude sphere topology whose
vertex set and face list are invariant under ``x -> -x``; the involution is
known combinatorially and vertex positions are mirrored exactly.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .mesh import TriangleMesh, face_areas

logger = logging.getLogger(__name__)

__all__ = [
    "sphere_topology",
    "icosphere",
    "mirrored_mesh",
    "dumbbell",
    "humanoid",
    "punch_holes",
    "ground_truth_pairs",
    "DEFAULT_BUMPS",
    "HUMANOID_LIMBS",
]

Bump = tuple[tuple[float, float, float], float, float]

# (direction, amplitude, width); mirrored copies are added automatically
DEFAULT_BUMPS: tuple[Bump, ...] = (
    ((0.55, 0.45, 0.7), 0.35, 0.08),
    ((0.8, -0.35, -0.45), 0.25, 0.06),
)
# arms, legs and a pair of horns on the head; long and narrow so every tip
# is a heat-kernel maximum. Arms and legs lean forward (+y), horns back, so
# front and back of the torso are not interchangeable.
HUMANOID_LIMBS: tuple[Bump, ...] = (
    ((1.0, 0.45, 0.35), 2.0, 0.03),
    ((0.45, 0.25, -1.0), 1.4, 0.03),
    ((0.35, -0.4, 1.0), 0.7, 0.02),
)
_MIRROR = np.array([-1.0, 1.0, 1.0])


def sphere_topology(n_lat: int, n_lon: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit directions, faces and the ``x -> -x`` vertex involution.

    ``n_lat`` latitude bands, ``n_lon`` (even) meridians. Poles sit on the z
    axis, every band quad is split into four triangles around a centre
    vertex, both caps are triangle fans. Vertex count is
    ``2 + (n_lat - 1) n_lon + (n_lat - 2) n_lon``.
    """
    if n_lat < 3 or n_lon < 4 or n_lon % 2:
        raise ValueError(f"need n_lat >= 3 and even n_lon >= 4, got {n_lat}, {n_lon}")
    N = n_lon
    n_ring = (n_lat - 1) * N

    def ring(i, j):
        return 2 + (i - 1) * N + np.mod(j, N)

    def centre(b, j):
        return 2 + n_ring + (b - 1) * N + np.mod(j, N)

    theta = np.pi * np.arange(1, n_lat) / n_lat
    phi = 2.0 * np.pi * np.arange(N) / N
    t_ring = np.repeat(theta, N)
    p_ring = np.tile(phi, n_lat - 1)
    t_mid = np.repeat(0.5 * (theta[:-1] + theta[1:]), N)
    p_mid = np.tile(phi + np.pi / N, n_lat - 2)
    t_all = np.concatenate(([0.0, np.pi], t_ring, t_mid))
    p_all = np.concatenate(([0.0, 0.0], p_ring, p_mid))
    dirs = np.column_stack((np.sin(t_all) * np.cos(p_all), np.sin(t_all) * np.sin(p_all), np.cos(t_all)))

    j = np.arange(N)
    faces = [
        np.column_stack((np.zeros(N, dtype=np.int64), ring(1, j), ring(1, j + 1))),
        np.column_stack((np.ones(N, dtype=np.int64), ring(n_lat - 1, j + 1), ring(n_lat - 1, j))),
    ]
    for b in range(1, n_lat - 1):
        m = centre(b, j)
        a, bb, c, d = ring(b, j), ring(b, j + 1), ring(b + 1, j + 1), ring(b + 1, j)
        faces += [
            np.column_stack((m, bb, a)),
            np.column_stack((m, c, bb)),
            np.column_stack((m, d, c)),
            np.column_stack((m, a, d)),
        ]

    # azimuth phi -> pi - phi
    involution = np.empty(dirs.shape[0], dtype=np.int64)
    involution[:2] = (0, 1)
    for i in range(1, n_lat):
        involution[ring(i, j)] = ring(i, N // 2 - j)
    for b in range(1, n_lat - 1):
        involution[centre(b, j)] = centre(b, N // 2 - j - 1)
    return dirs, np.vstack(faces).astype(np.int64), involution


def _mirror_exactly(pos: np.ndarray, involution: np.ndarray) -> np.ndarray:
    pos = pos.copy()
    idx = np.arange(pos.shape[0])
    lead = idx < involution
    pos[involution[lead]] = pos[lead] * _MIRROR
    pos[involution == idx, 0] = 0.0
    return pos


def _with_mirrors(bumps: Sequence[Bump]) -> list[Bump]:
    out: list[Bump] = []
    for (x, y, z), amp, width in bumps:
        out.append(((x, y, z), amp, width))
        if x != 0.0:
            out.append(((-x, y, z), amp, width))
    return out


def _radial(dirs: np.ndarray, bumps: Sequence[Bump]) -> np.ndarray:
    r = np.ones(dirs.shape[0])
    for centre, amp, width in _with_mirrors(bumps):
        c = np.asarray(centre, dtype=np.float64)
        c = c / np.linalg.norm(c)
        r += amp * np.exp(-(1.0 - dirs @ c) / width)
    return r


def _build(
    n_lat: int, n_lon: int, shape: Callable[[np.ndarray], np.ndarray]
) -> tuple[TriangleMesh, np.ndarray]:
    dirs, faces, involution = sphere_topology(n_lat, n_lon)
    pos = _mirror_exactly(shape(dirs), involution)
    mesh = TriangleMesh.from_arrays(pos, faces)
    logger.debug("Synthetic mirrored mesh n=%d faces=%d", mesh.n, mesh.n_faces)
    return mesh, involution


def mirrored_mesh(
    n_lat: int = 40,
    n_lon: int = 80,
    axes: tuple[float, float, float] = (1.6, 0.7, 1.1),
    bumps: Optional[Sequence[Bump]] = None,
    scale: float = 1.0,
) -> tuple[TriangleMesh, np.ndarray]:
    """Bumpy ellipsoid mirrored across ``x = 0``; returns the mesh and the involution.

    The long axis is ``x``, so the first non-constant eigenfunction is odd.
    Every bump off the mirror plane gets a mirrored twin.
    """
    bumps = DEFAULT_BUMPS if bumps is None else tuple(bumps)
    ax = np.asarray(axes, dtype=np.float64)

    def shape(dirs: np.ndarray) -> np.ndarray:
        return scale * _radial(dirs, bumps)[:, np.newaxis] * dirs * ax

    return _build(n_lat, n_lon, shape)


def dumbbell(
    n_lat: int = 40,
    n_lon: int = 80,
    length: float = 2.0,
    neck: float = 0.6,
    neck_width: float = 0.25,
    cross_section: tuple[float, float] = (0.8, 1.0),
) -> tuple[TriangleMesh, np.ndarray]:
    """Two bulbs along ``x`` joined by a neck at ``x = 0``; elliptical cross-section."""
    ey, ez = cross_section

    def shape(dirs: np.ndarray) -> np.ndarray:
        rho = 1.0 - neck * np.exp(-(dirs[:, 0] ** 2) / neck_width ** 2)
        return np.column_stack((length * dirs[:, 0], ey * rho * dirs[:, 1], ez * rho * dirs[:, 2]))

    return _build(n_lat, n_lon, shape)


def humanoid(
    n_lat: int = 40,
    n_lon: int = 80,
    axes: tuple[float, float, float] = (0.7, 0.5, 1.0),
    limbs: Optional[Sequence[Bump]] = None,
    scale: float = 1.0,
) -> tuple[TriangleMesh, np.ndarray]:
    """Upright torso (``z`` up) with mirrored limbs; returns the mesh and the involution.

    The default limbs give three left/right pairs of extremities. Low modes
    include an odd left-right one and an even head-foot one.
    """
    limbs = HUMANOID_LIMBS if limbs is None else tuple(limbs)
    ax = np.asarray(axes, dtype=np.float64)

    def shape(dirs: np.ndarray) -> np.ndarray:
        return scale * _radial(dirs, limbs)[:, np.newaxis] * dirs * ax

    return _build(n_lat, n_lon, shape)


# ───────────────────────────── Icosphere ─────────────────────────────
def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    """Subdivided icosahedron projected onto the sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    vertices = [np.asarray(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = vertices[a] + vertices[b]
                vertices.append(m / np.linalg.norm(m))
                cache[key] = len(vertices) - 1
            return cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined
    return TriangleMesh.from_arrays(radius * np.vstack(vertices), np.asarray(faces, dtype=np.int64))


# ───────────────────────────── Partiality ─────────────────────────────
def punch_holes(
    mesh: TriangleMesh,
    fraction: float = 0.08,
    centre: Optional[Sequence[float]] = None,
) -> tuple[TriangleMesh, np.ndarray]:
    """Remove the faces closest to ``centre`` until ``fraction`` of the area is gone.

    ``centre`` defaults to a point on the ``x > 0`` side, away from both the
    mirror plane and the tip of the long axis. Returns the reduced mesh and an
    old-to-new vertex map (``-1`` for removed vertices); only the largest
    connected piece is kept.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    v, f = mesh.vertices, mesh.faces
    if centre is None:
        lo, hi = v.min(axis=0), v.max(axis=0)
        target = np.array([0.5 * hi[0], hi[1], 0.5 * (lo[2] + hi[2])])
        centre = v[np.argmin(np.linalg.norm(v - target, axis=1))]
    centroids = v[f].mean(axis=1)
    order = np.argsort(np.linalg.norm(centroids - np.asarray(centre), axis=1), kind="stable")
    areas = face_areas(mesh)
    budget = fraction * areas.sum()
    removed = np.cumsum(areas[order]) <= budget
    keep = np.ones(mesh.n_faces, dtype=bool)
    keep[order[removed]] = False
    faces = f[keep]

    used = np.unique(faces)
    remap = np.full(mesh.n, -1, dtype=np.int64)
    remap[used] = np.arange(used.size)
    faces = remap[faces]
    vertices = v[used]

    # largest edge-connected piece
    e = np.vstack((faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]))
    graph = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(used.size, used.size))
    _, labels = csgraph.connected_components(graph, directed=False)
    main = np.argmax(np.bincount(labels))
    if np.any(labels != main):
        keep_v = labels == main
        faces = faces[keep_v[faces[:, 0]]]
        second = np.full(used.size, -1, dtype=np.int64)
        second[keep_v] = np.arange(int(keep_v.sum()))
        faces = second[faces]
        vertices = vertices[keep_v]
        remap[used] = second
    logger.info("Removed %d faces (%.1f%% of the area); %d vertices remain",
                int((~keep).sum()), 100.0 * areas[~keep].sum() / areas.sum(), vertices.shape[0])
    return TriangleMesh.from_arrays(vertices, faces), remap


def ground_truth_pairs(involution: np.ndarray, remap: Optional[np.ndarray] = None) -> np.ndarray:
    """``(j, pi(j))`` rows, restricted to vertices that survive ``remap``."""
    involution = np.asarray(involution, dtype=np.int64)
    src = np.arange(involution.shape[0])
    if remap is None:
        return np.column_stack((src, involution))
    a, b = remap[src], remap[involution]
    ok = (a >= 0) & (b >= 0)
    return np.column_stack((a[ok], b[ok]))
