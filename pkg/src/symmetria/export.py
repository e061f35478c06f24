"""Colour-encoded scalar fields as ASCII PLY."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from .mesh import TriangleMesh

logger = logging.getLogger(__name__)

__all__ = ["colormap", "write_ply", "export_field"]

_BLUE = np.array([0.0, 0.0, 255.0])
_YELLOW = np.array([255.0, 255.0, 0.0])
_FLAT = 1e-9


def colormap(values: np.ndarray) -> np.ndarray:
    """``n x 3`` uint8 colours from blue (minimum) to yellow (maximum).

    A field that is constant up to round-off (relative spread below
    ``1e-9``) maps entirely to blue.
    """
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    flat = hi - lo <= _FLAT * max(abs(lo), abs(hi))
    t = np.zeros_like(values) if flat else (values - lo) / (hi - lo)
    rgb = (1.0 - t)[:, np.newaxis] * _BLUE + t[:, np.newaxis] * _YELLOW
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def write_ply(mesh: TriangleMesh, colors: np.ndarray, path: str | Path, comment: Optional[str] = None) -> Path:
    path = Path(path)
    header = ["ply", "format ascii 1.0"]
    if comment:
        header += [f"comment {line}" for line in comment.splitlines()]
    header += [
        f"element vertex {mesh.n}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    body = [
        f"{x:.9g} {y:.9g} {z:.9g} {r} {g} {b}"
        for (x, y, z), (r, g, b) in zip(mesh.vertices.tolist(), colors.tolist())
    ]
    body += [f"3 {a} {b} {c}" for a, b, c in mesh.faces.tolist()]
    path.write_text("\n".join(header + body) + "\n", encoding="ascii")
    return path


def export_field(mesh: TriangleMesh, values: np.ndarray, path: str | Path, label: str = "") -> Path:
    """Colour-map ``values`` and write them with a ``scalar_range`` comment."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (mesh.n,):
        raise ValueError(f"field has {values.shape[0]} values for {mesh.n} vertices")
    comment = f"scalar_range {float(values.min())!r} {float(values.max())!r}"
    if label:
        comment = f"field {label}\n" + comment
    logger.info("Exporting %s to %s (range %.4g .. %.4g)", label or "field", path, values.min(), values.max())
    return write_ply(mesh, colormap(values), path, comment)
