"""End-to-end intrinsic symmetry detection."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .config import RunConfig, thread_limit
from .correction import RotationCorrection, build_problem, cost, optimize
from .correspondence import SymmetryMap, embed, involution_diagnostics, nearest_neighbor_map
from .errors import NoFeaturesError
from .functional_map import FunctionalMap, build_functional_map
from .geodesics import GeodesicPath, shortest_path
from .mesh import AdjacencyIndex, TriangleMesh, build_adjacency
from .pairing import AffinityMatrix, PairSet, build_affinity, default_pair_count, solve_assignment
from .signatures import FeatureSet, detect_features, sign_agreement
from .spectral import LaplaceOperator, SpectralBasis, assemble_operator, eigen_gap_flags, eigendecompose

logger = logging.getLogger(__name__)

__all__ = ["DetectionResult", "SymmetryDetector", "STAGES"]

STAGES = (
    "operator",
    "eigensolve",
    "features",
    "pairing",
    "geodesics",
    "functional_map",
    "correction",
    "correspondence",
    "involution",
)


@dataclass
class DetectionResult:
    mesh: TriangleMesh
    adjacency: AdjacencyIndex
    basis: SpectralBasis
    gap_flags: np.ndarray
    features: FeatureSet
    affinity: AffinityMatrix
    pairs: PairSet
    paths: list[GeodesicPath]
    fmap: FunctionalMap
    rotation: RotationCorrection
    symmetry: SymmetryMap
    operator: Optional[LaplaceOperator] = None
    timings: dict[str, float] = field(default_factory=dict)
    mesh_id: str = ""

    @property
    def sigma(self) -> np.ndarray:
        return self.symmetry.sigma

    @property
    def trace(self) -> tuple[dict, ...]:
        return self.rotation.trace

    @property
    def post_eigensolve_seconds(self) -> float:
        return sum(v for k, v in self.timings.items() if k not in ("operator", "eigensolve"))

    def report(self, config: Optional[RunConfig] = None) -> dict:
        """JSON-serialisable run summary."""
        err = self.symmetry.involution_error
        out = {
            "mesh": self.mesh_id,
            "n": self.mesh.n,
            "k": self.basis.k,
            "eigenvalues": self.basis.eigenvalues.tolist(),
            "gap_flags": self.gap_flags.astype(bool).tolist(),
            "features": self.features.indices.tolist(),
            "t_h": self.features.t_h,
            "feature_set": self.features.to_dict(),
            "sign_agreement": sign_agreement(self.mesh, self.basis),
            "pairs": [list(p) for p in self.pairs.vertex_pairs(self.features)],
            "pair_cost": self.pairs.total_cost,
            "q": self.affinity.q,
            "geodesic_lengths": [p.length for p in self.paths],
            "sign": self.fmap.sign.tolist(),
            "active": self.fmap.active.tolist(),
            "confidence": self.fmap.confidence.tolist(),
            "correction": {
                "initial_cost": self.rotation.initial_cost,
                "final_cost": self.rotation.final_cost,
                "iterations": self.rotation.iterations,
                "grad_norm": self.rotation.grad_norm,
                "converged": self.rotation.converged,
                "trace": [dict(t) for t in self.rotation.trace],
            },
            "nn_distance_max": float(self.symmetry.nn_distance.max()),
            "involution_error_median": float(np.median(err)) if err is not None else None,
            "timings": dict(self.timings),
        }
        if config is not None:
            out["config"] = config.to_dict()
        return out


class SymmetryDetector:
    """Detects the intrinsic reflective symmetry of a triangle mesh.

    ``detect`` runs every stage; ``detect_from_basis`` starts from a given
    eigenbasis so transformed bases can be injected.
    """

    def __init__(self, config: Optional[RunConfig] = None) -> None:
        self.config = (config or RunConfig()).validate()

    @contextmanager
    def _stage(self, name: str, timings: dict[str, float], mesh_id: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        except Exception as exc:
            timings[name] = time.perf_counter() - start
            self.on_stage(name, mesh_id, False, timings[name], str(exc))
            raise
        timings[name] = time.perf_counter() - start
        self.on_stage(name, mesh_id, True, timings[name], None)

    def on_stage(self, stage: str, mesh_id: str, success: bool, seconds: float, error: Optional[str]) -> None:
        """Hook called after every stage."""
        logger.debug("Stage %s %s in %.3fs", stage, "done" if success else "failed", seconds)

    def detect(self, mesh: TriangleMesh, mesh_id: str = "") -> DetectionResult:
        timings: dict[str, float] = {}
        with self._stage("operator", timings, mesh_id):
            op = assemble_operator(mesh)
        with self._stage("eigensolve", timings, mesh_id):
            basis = eigendecompose(op, self.config.k)
        return self._run(mesh, basis, timings, mesh_id, op)

    def detect_from_basis(self, mesh: TriangleMesh, basis: SpectralBasis, mesh_id: str = "") -> DetectionResult:
        return self._run(mesh, basis, {}, mesh_id, None)

    def _run(
        self,
        mesh: TriangleMesh,
        basis: SpectralBasis,
        timings: dict[str, float],
        mesh_id: str,
        op: Optional[LaplaceOperator],
    ) -> DetectionResult:
        cfg = self.config
        with self._stage("features", timings, mesh_id):
            adjacency = build_adjacency(mesh)
            gap_flags = eigen_gap_flags(basis, cfg.tau_gap)
            features = detect_features(mesh, adjacency, basis, cfg.d_max, cfg.t_steps)
            if features.d < 2:
                raise NoFeaturesError(f"only {features.d} feature point(s); at least 2 are needed")

        with self._stage("pairing", timings, mesh_id):
            affinity = build_affinity(features, q_multiplier=cfg.q_multiplier)
            c = cfg.c if cfg.c is not None else default_pair_count(features.d)
            pairs = solve_assignment(affinity, c)
            vertex_pairs = pairs.vertex_pairs(features)

        with self._stage("geodesics", timings, mesh_id):
            paths = [shortest_path(mesh, adjacency, x, y) for x, y in vertex_pairs]

        with self._stage("functional_map", timings, mesh_id):
            fmap = build_functional_map(
                basis, pairs, paths, gap_flags, eps_sign=cfg.eps_sign, min_active=cfg.min_active
            )

        with self._stage("correction", timings, mesh_id):
            prob = build_problem(basis, fmap, vertex_pairs, cfg.mu)
            if cfg.correction:
                rotation = optimize(prob, None, cfg.max_iter, cfg.tol_grad, hessian=cfg.hessian)
            else:
                f0 = cost(prob, np.eye(prob.k))
                rotation = RotationCorrection(np.eye(prob.k), f0, 0, initial_cost=f0, converged=False)

        with self._stage("correspondence", timings, mesh_id):
            source, target = embed(basis, fmap, rotation)
            symmetry = nearest_neighbor_map(source, target, workers=thread_limit(cfg))

        with self._stage("involution", timings, mesh_id):
            symmetry = symmetry.with_involution_error(involution_diagnostics(mesh, symmetry.sigma))

        logger.info(
            "Detected symmetry on %s: %d pairs, %d active eigenfunctions, median involution error %.4g",
            mesh_id or "mesh", pairs.c, fmap.active.size, float(np.median(symmetry.involution_error)),
        )
        return DetectionResult(
            mesh=mesh,
            adjacency=adjacency,
            basis=basis,
            gap_flags=gap_flags,
            features=features,
            affinity=affinity,
            pairs=pairs,
            paths=paths,
            fmap=fmap,
            rotation=rotation,
            symmetry=symmetry,
            operator=op,
            timings=timings,
            mesh_id=mesh_id,
        )
