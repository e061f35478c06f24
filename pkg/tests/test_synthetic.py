import numpy as np
import pytest

from symmetria.mesh import face_areas, surface_area
from symmetria.synthetic import (
    dumbbell,
    humanoid,
    ground_truth_pairs,
    icosphere,
    mirrored_mesh,
    punch_holes,
    sphere_topology,
)


def _face_set(faces):
    return {tuple(sorted(f)) for f in faces.tolist()}


def test_sphere_topology_counts():
    dirs, faces, involution = sphere_topology(16, 32)
    assert dirs.shape == (2 + 15 * 32 + 14 * 32, 3)
    assert dirs.shape[0] == 930
    assert faces.shape == (2 * 32 + 4 * 14 * 32, 3)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert involution.shape == (930,)


@pytest.mark.parametrize("n_lat, n_lon", [(2, 8), (8, 3), (8, 7)])
def test_sphere_topology_rejects_bad_resolution(n_lat, n_lon):
    with pytest.raises(ValueError):
        sphere_topology(n_lat, n_lon)


def test_involution_maps_faces_to_faces():
    _, faces, involution = sphere_topology(10, 20)
    np.testing.assert_array_equal(involution[involution], np.arange(involution.size))
    assert _face_set(involution[faces]) == _face_set(faces)


def test_mirrored_positions_are_exact(small_mirrored):
    mesh, pi = small_mirrored
    v = mesh.vertices
    np.testing.assert_array_equal(v[pi], v * [-1.0, 1.0, 1.0])
    fixed = pi == np.arange(mesh.n)
    assert fixed.any()
    np.testing.assert_array_equal(v[fixed, 0], 0.0)


def test_default_mirrored_mesh(mirrored):
    mesh, pi = mirrored
    assert mesh.n == 6162
    # the long axis is x
    extent = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    assert np.argmax(extent) == 0


def test_scaled_mirrored_mesh():
    small, _ = mirrored_mesh(n_lat=8, n_lon=16)
    large, _ = mirrored_mesh(n_lat=8, n_lon=16, scale=2.0)
    np.testing.assert_array_equal(large.vertices, 2.0 * small.vertices)
    np.testing.assert_array_equal(large.faces, small.faces)


def test_dumbbell_is_mirrored():
    mesh, pi = dumbbell(n_lat=12, n_lon=24)
    np.testing.assert_array_equal(mesh.vertices[pi], mesh.vertices * [-1.0, 1.0, 1.0])
    # the neck is thinner than the bulbs
    v = mesh.vertices
    neck = np.abs(v[:, 0]) < 0.1
    assert np.abs(v[neck, 1]).max() < np.abs(v[:, 1]).max()


def test_humanoid_is_mirrored(limbed):
    mesh, pi = limbed
    assert mesh.n == 6162
    np.testing.assert_array_equal(mesh.vertices[pi], mesh.vertices * [-1.0, 1.0, 1.0])
    v = mesh.vertices
    # arms and legs reach well beyond the torso
    assert v[:, 0].max() > 1.5
    assert v[:, 2].min() < -1.8


def test_humanoid_scale():
    small, _ = humanoid(n_lat=12, n_lon=24)
    large, _ = humanoid(n_lat=12, n_lon=24, scale=2.0)
    np.testing.assert_array_equal(large.vertices, 2.0 * small.vertices)


def test_icosphere():
    mesh = icosphere(2, radius=3.0)
    assert mesh.n == 162
    assert mesh.n_faces == 320
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 3.0)
    assert surface_area(mesh) == pytest.approx(4.0 * np.pi * 9.0, rel=0.05)


def test_punch_holes_removes_at_most_fraction(small_mirrored):
    mesh, pi = small_mirrored
    holed, remap = punch_holes(mesh, fraction=0.08)
    assert holed.n < mesh.n
    assert surface_area(holed) >= 0.92 * surface_area(mesh) - 1e-12
    assert face_areas(holed).sum() < surface_area(mesh)
    kept = remap >= 0
    assert int(kept.sum()) == holed.n
    np.testing.assert_array_equal(holed.vertices[remap[kept]], mesh.vertices[kept])

    gt = ground_truth_pairs(pi, remap)
    assert 0 < gt.shape[0] < mesh.n
    assert gt.min() >= 0 and gt.max() < holed.n
    np.testing.assert_array_equal(holed.vertices[gt[:, 1]], holed.vertices[gt[:, 0]] * [-1.0, 1.0, 1.0])


def test_punch_holes_rejects_bad_fraction(tetrahedron):
    with pytest.raises(ValueError):
        punch_holes(tetrahedron, fraction=0.0)
    with pytest.raises(ValueError):
        punch_holes(tetrahedron, fraction=1.0)


def test_ground_truth_pairs_without_remap():
    pi = np.array([2, 1, 0])
    np.testing.assert_array_equal(ground_truth_pairs(pi), [[0, 2], [1, 1], [2, 0]])
