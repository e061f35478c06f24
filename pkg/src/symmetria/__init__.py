"""symmetria package

Classic src/ layout:
    src/symmetria/
        __init__.py          (re-export public API)
        mesh.py              (TriangleMesh, OFF/OBJ parsing, adjacency)
        spectral.py          (cotangent Laplacian + eigenbasis)
        signatures.py        (HKS features)
        pairing.py           (exact symmetric pair assignment)
        geodesics.py         (edge-graph shortest paths)
        functional_map.py    (diagonal functional map from parity votes)
        correction.py        (rotation correction on SO(k))
        correspondence.py    (dense nearest-neighbour symmetry map)
        evaluation.py        (correspondence / mesh rates)
        detector.py          (SymmetryDetector pipeline)
        logger.py            (RunLogger + LoggedSymmetryDetector)
        config.py            (RunConfig resolution)
        export.py            (PLY colour export)
        synthetic.py         (meshes with known symmetry)
        cli.py               (symmetria command)
"""
from .config import RunConfig, resolve_config  # noqa: F401
from .correction import CorrectionProblem, RotationCorrection, build_problem, cost, optimize  # noqa: F401
from .correspondence import SymmetryMap, embed, nearest_neighbor_map  # noqa: F401
from .detector import DetectionResult, SymmetryDetector  # noqa: F401
from .errors import ConvergenceWarning, NumericalError, SymmetriaError  # noqa: F401
from .evaluation import EvalReport, correspondence_rate, mesh_rate  # noqa: F401
from .functional_map import FunctionalMap, build_functional_map  # noqa: F401
from .logger import LoggedSymmetryDetector, RunLogger  # noqa: F401
from .mesh import AdjacencyIndex, TriangleMesh, build_adjacency, parse_mesh  # noqa: F401
from .pairing import PairSet, build_affinity, solve_assignment  # noqa: F401
from .signatures import FeatureSet, detect_features  # noqa: F401
from .spectral import LaplaceOperator, SpectralBasis, assemble_operator, eigendecompose  # noqa: F401

__version__ = "0.1.0"
