"""Triangle mesh container, OFF/OBJ parsing and adjacency queries.

Everything downstream (operator assembly, feature detection, geodesics,
evaluation) reads the mesh through the functions in this module.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import NonManifoldError, ParseError, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "TriangleMesh",
    "AdjacencyIndex",
    "parse_mesh",
    "write_off",
    "build_adjacency",
    "k_ring",
    "face_areas",
    "vertex_areas",
    "surface_area",
    "edge_lengths",
    "bounding_box_diagonal",
]

# Relative to the squared bounding-box diagonal.
AREA_EPS = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TriangleMesh:
    """Validated triangle mesh.

    ``vertices`` is ``(n, 3)`` float, ``faces`` is ``(m, 3)`` int (0-based) and
    ``edge_list`` holds the unique undirected edges as sorted ``(a, b)`` rows.
    Arrays are read-only; build a new mesh with :meth:`from_arrays` to change
    geometry.
    """

    vertices: np.ndarray
    faces: np.ndarray
    edge_list: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_faces(self) -> int:
        return int(self.faces.shape[0])

    @classmethod
    def from_arrays(cls, vertices, faces) -> "TriangleMesh":
        """Validate raw arrays and return an immutable mesh.

        Raises :class:`ValidationError` for out-of-range indices, repeated
        vertices within a face, degenerate faces and disconnected meshes.
        """
        v = np.array(vertices, dtype=np.float64, copy=True)
        f = np.array(faces, dtype=np.int64, copy=True)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValidationError("vertices must have shape (n, 3)", element=f"shape={v.shape}")
        if f.ndim != 2 or f.shape[1] != 3 or f.shape[0] == 0:
            raise ValidationError("faces must have shape (m, 3) with m > 0", element=f"shape={f.shape}")
        if not np.all(np.isfinite(v)):
            bad = int(np.argwhere(~np.isfinite(v))[0, 0])
            raise ValidationError("non-finite vertex coordinate", element=f"vertex {bad}")
        n = v.shape[0]

        out_of_range = (f < 0) | (f >= n)
        if out_of_range.any():
            fi = int(np.argwhere(out_of_range)[0, 0])
            raise ValidationError(
                f"face index out of range [0, {n})", element=f"face {fi}: {f[fi].tolist()}"
            )

        repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        if repeated.any():
            fi = int(np.argmax(repeated))
            raise ValidationError("face repeats a vertex", element=f"face {fi}: {f[fi].tolist()}")

        areas = _face_areas(v, f)
        diag = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
        eps_area = AREA_EPS * diag * diag
        degenerate = areas <= eps_area
        if degenerate.any():
            fi = int(np.argmax(degenerate))
            raise ValidationError(
                f"degenerate face (area {areas[fi]:.3e} <= {eps_area:.3e})",
                element=f"face {fi}: {f[fi].tolist()}",
            )

        edges = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        edges = np.unique(edges, axis=0)

        graph = sparse.coo_matrix(
            (np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n)
        )
        n_components, labels = csgraph.connected_components(graph, directed=False)
        if n_components != 1:
            sizes = np.bincount(labels)
            raise ValidationError(
                f"mesh is disconnected ({n_components} components)",
                element=f"component sizes {sorted(sizes.tolist(), reverse=True)[:5]}",
            )

        return cls(vertices=_frozen(v), faces=_frozen(f), edge_list=_frozen(edges))


@dataclass(frozen=True)
class AdjacencyIndex:
    """One-ring, incident-face and edge-face tables of a :class:`TriangleMesh`."""

    one_ring: tuple[np.ndarray, ...]
    vertex_faces: tuple[np.ndarray, ...]
    edge_faces: Mapping[tuple[int, int], tuple[int, ...]]

    def is_boundary_edge(self, a: int, b: int) -> bool:
        key = (a, b) if a < b else (b, a)
        return len(self.edge_faces[key]) == 1

    def boundary_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, fs in self.edge_faces.items() if len(fs) == 1)


# ───────────────────────────── Parsing ─────────────────────────────
def _data_lines(path: Path):
    """Yield ``(line_number, tokens)`` for non-empty, non-comment lines."""
    with path.open("r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _parse_off(path: Path) -> tuple[list[list[float]], list[list[int]]]:
    lines = _data_lines(path)
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty file", path=str(path)) from None
    if not tokens[0].upper().endswith("OFF"):
        raise ParseError(f"expected 'OFF' header, got {tokens[0]!r}", path=str(path), line=lineno)
    # Counts may share the header line ("OFF 4 4 6").
    counts = tokens[1:]
    if not counts:
        try:
            lineno, counts = next(lines)
        except StopIteration:
            raise ParseError("missing counts line", path=str(path)) from None
    try:
        n_vertices, n_faces = int(counts[0]), int(counts[1])
    except (IndexError, ValueError):
        raise ParseError(f"bad counts line {' '.join(counts)!r}", path=str(path), line=lineno) from None

    vertices: list[list[float]] = []
    for _ in range(n_vertices):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError(
                f"expected {n_vertices} vertices, found {len(vertices)}", path=str(path)
            ) from None
        try:
            vertices.append([float(t) for t in tokens[:3]])
        except ValueError:
            raise ParseError(f"bad vertex record {' '.join(tokens)!r}", path=str(path), line=lineno) from None
        if len(vertices[-1]) != 3:
            raise ParseError("vertex record needs 3 coordinates", path=str(path), line=lineno)

    faces: list[list[int]] = []
    for _ in range(n_faces):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError(f"expected {n_faces} faces, found {len(faces)}", path=str(path)) from None
        try:
            count = int(tokens[0])
            idx = [int(t) for t in tokens[1 : 1 + count]]
        except ValueError:
            raise ParseError(f"bad face record {' '.join(tokens)!r}", path=str(path), line=lineno) from None
        if count != 3 or len(idx) != 3:
            raise ParseError(f"only triangles are supported, got {count}-gon", path=str(path), line=lineno)
        for i in idx:
            if not 0 <= i < n_vertices:
                raise ValidationError(
                    f"face index {i} out of range [0, {n_vertices})", element=f"{path}:{lineno}"
                )
        faces.append(idx)
    return vertices, faces


def _parse_obj(path: Path) -> tuple[list[list[float]], list[list[int]]]:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    face_lines: list[int] = []
    for lineno, tokens in _data_lines(path):
        tag = tokens[0]
        if tag == "v":
            try:
                vertices.append([float(t) for t in tokens[1:4]])
            except ValueError:
                raise ParseError(f"bad vertex record {' '.join(tokens)!r}", path=str(path), line=lineno) from None
            if len(vertices[-1]) != 3:
                raise ParseError("vertex record needs 3 coordinates", path=str(path), line=lineno)
        elif tag == "f":
            try:
                # "i", "i/t", "i//n", "i/t/n" -> i; negative indices are relative.
                raw = [int(t.split("/", 1)[0]) for t in tokens[1:]]
            except ValueError:
                raise ParseError(f"bad face record {' '.join(tokens)!r}", path=str(path), line=lineno) from None
            if len(raw) < 3:
                raise ParseError("face needs at least 3 vertices", path=str(path), line=lineno)
            idx = [i - 1 if i > 0 else len(vertices) + i for i in raw]
            # Fan-triangulate polygons.
            for a, b in zip(idx[1:-1], idx[2:]):
                faces.append([idx[0], a, b])
                face_lines.append(lineno)
        # normals, texcoords, groups and materials are ignored
    n = len(vertices)
    for face, lineno in zip(faces, face_lines):
        for i in face:
            if not 0 <= i < n:
                raise ValidationError(
                    f"face index {i + 1} out of range [1, {n}]", element=f"{path}:{lineno}"
                )
    return vertices, faces


def parse_mesh(path: str | Path, format: Optional[str] = None) -> TriangleMesh:
    """Read an OFF or OBJ file into a validated :class:`TriangleMesh`.

    ``format`` is ``"off"`` or ``"obj"``; when omitted it is taken from the
    file suffix. Vertex order is preserved.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if not path.exists():
        raise FileNotFoundError(path)
    if fmt == "off":
        vertices, faces = _parse_off(path)
    elif fmt == "obj":
        vertices, faces = _parse_obj(path)
    else:
        raise ParseError(f"unsupported mesh format {fmt!r} (expected off or obj)", path=str(path))
    if not faces:
        raise ParseError("no faces found", path=str(path))
    mesh = TriangleMesh.from_arrays(vertices, faces)
    logger.info("Loaded %s: n=%d faces=%d edges=%d", path.name, mesh.n, mesh.n_faces, len(mesh.edge_list))
    return mesh


def write_off(mesh: TriangleMesh, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n} {mesh.n_faces} {len(mesh.edge_list)}\n")
        for x, y, z in mesh.vertices.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")
        for a, b, c in mesh.faces.tolist():
            fh.write(f"3 {a} {b} {c}\n")
    return path


# ───────────────────────────── Adjacency ─────────────────────────────
def build_adjacency(mesh: TriangleMesh) -> AdjacencyIndex:
    """Derive one-rings, vertex-face lists and edge-face pairs.

    Raises :class:`NonManifoldError` when an edge has more than two incident
    faces.
    """
    n = mesh.n
    edge_faces: dict[tuple[int, int], list[int]] = {}
    vertex_faces: list[list[int]] = [[] for _ in range(n)]
    for fi, (a, b, c) in enumerate(mesh.faces.tolist()):
        vertex_faces[a].append(fi)
        vertex_faces[b].append(fi)
        vertex_faces[c].append(fi)
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            edge_faces.setdefault(key, []).append(fi)

    for key, fs in edge_faces.items():
        if len(fs) > 2:
            raise NonManifoldError(key, len(fs))

    neighbours: list[set[int]] = [set() for _ in range(n)]
    for a, b in edge_faces:
        neighbours[a].add(b)
        neighbours[b].add(a)

    return AdjacencyIndex(
        one_ring=tuple(_frozen(np.array(sorted(s), dtype=np.int64)) for s in neighbours),
        vertex_faces=tuple(_frozen(np.array(fs, dtype=np.int64)) for fs in vertex_faces),
        edge_faces=MappingProxyType({k: tuple(v) for k, v in edge_faces.items()}),
    )


def k_ring(adjacency: AdjacencyIndex, j: int, k: int) -> np.ndarray:
    """Vertices within ``k`` edge hops of ``j`` (excluding ``j``), sorted."""
    seen = {j}
    frontier = {j}
    for _ in range(k):
        nxt: set[int] = set()
        for v in frontier:
            nxt.update(adjacency.one_ring[v].tolist())
        frontier = nxt - seen
        seen |= frontier
    seen.discard(j)
    return np.array(sorted(seen), dtype=np.int64)


# ───────────────────────────── Measures ─────────────────────────────
def _face_areas(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    cr = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    return 0.5 * np.sqrt(np.sum(cr * cr, axis=1))


def face_areas(mesh: TriangleMesh) -> np.ndarray:
    return _face_areas(mesh.vertices, mesh.faces)


def vertex_areas(mesh: TriangleMesh) -> np.ndarray:
    """Barycentric vertex areas: one third of the incident face areas."""
    area3 = np.repeat(face_areas(mesh)[:, np.newaxis], 3, axis=1)
    return np.bincount(mesh.faces.reshape(-1), area3.reshape(-1), minlength=mesh.n) / 3.0


def surface_area(mesh: TriangleMesh) -> float:
    return float(np.sum(face_areas(mesh)))


def edge_lengths(mesh: TriangleMesh) -> np.ndarray:
    e = mesh.edge_list
    return np.linalg.norm(mesh.vertices[e[:, 0]] - mesh.vertices[e[:, 1]], axis=1)


def bounding_box_diagonal(mesh: TriangleMesh) -> float:
    return float(np.linalg.norm(mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)))
