import numpy as np
import pytest

from symmetria import RunConfig, SymmetryDetector, TriangleMesh
from symmetria.synthetic import humanoid, icosphere, mirrored_mesh

TETRA_OFF = """OFF
4 4 6
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
"""


@pytest.fixture
def tetrahedron():
    vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    faces = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]
    return TriangleMesh.from_arrays(vertices, faces)


@pytest.fixture
def tetra_off(tmp_path):
    path = tmp_path / "tetra.off"
    path.write_text(TETRA_OFF)
    return path


@pytest.fixture(scope="session")
def sphere():
    # 642 vertices
    return icosphere(3)


@pytest.fixture(scope="session")
def small_mirrored():
    """930-vertex mirrored mesh (dense eigensolver path)."""
    return mirrored_mesh(n_lat=16, n_lon=32)


@pytest.fixture(scope="session")
def mirrored():
    """6162-vertex mirrored mesh and its involution."""
    return mirrored_mesh()


@pytest.fixture(scope="session")
def mirrored_result(mirrored):
    mesh, _ = mirrored
    return SymmetryDetector(RunConfig()).detect(mesh, mesh_id="mirrored")


@pytest.fixture(scope="session")
def limbed():
    """6162-vertex humanoid with three mirrored pairs of extremities."""
    return humanoid()


@pytest.fixture(scope="session")
def limbed_result(limbed):
    mesh, _ = limbed
    return SymmetryDetector(RunConfig()).detect(mesh, mesh_id="humanoid")


def random_rotation(rng, k):
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
