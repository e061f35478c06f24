"""End-to-end behaviour on meshes with a known involution."""
import numpy as np
import pytest

from symmetria import RunConfig, SymmetryDetector
from symmetria.evaluation import correspondence_rate
from symmetria.synthetic import ground_truth_pairs, mirrored_mesh, punch_holes


def test_recovers_mirror_symmetry(mirrored, mirrored_result):
    mesh, pi = mirrored
    report = correspondence_rate(mesh, mirrored_result.sigma, ground_truth_pairs(pi))
    assert report.corr_rate >= 0.95


def test_first_nonconstant_eigenfunction_is_odd(mirrored_result):
    order = np.argsort(mirrored_result.basis.eigenvalues)
    assert mirrored_result.fmap.sign[order[1]] == -1


def test_invariant_to_eigenvector_signs(mirrored, mirrored_result):
    mesh, _ = mirrored
    k = mirrored_result.basis.k
    signs = np.where(np.arange(k) % 3 == 1, -1.0, 1.0)
    flipped = mirrored_result.basis.sign_flipped(signs)
    result = SymmetryDetector(RunConfig()).detect_from_basis(mesh, flipped)
    np.testing.assert_array_equal(result.sigma, mirrored_result.sigma)
    np.testing.assert_array_equal(result.fmap.sign, mirrored_result.fmap.sign)


def test_invariant_to_eigenpair_order(mirrored, mirrored_result):
    mesh, _ = mirrored
    perm = np.random.default_rng(4).permutation(mirrored_result.basis.k)
    shuffled = mirrored_result.basis.permuted(perm)
    result = SymmetryDetector(RunConfig()).detect_from_basis(mesh, shuffled)
    np.testing.assert_array_equal(result.sigma, mirrored_result.sigma)
    np.testing.assert_array_equal(result.fmap.sign, mirrored_result.fmap.sign[perm])


@pytest.mark.parametrize("scale", [0.1, 10.0])
def test_invariant_to_uniform_scale(scale, mirrored_result):
    mesh, _ = mirrored_mesh(scale=scale)
    result = SymmetryDetector(RunConfig()).detect(mesh, mesh_id=f"scaled-{scale}")
    np.testing.assert_array_equal(result.sigma, mirrored_result.sigma)


def test_limbed_shape_pairs_every_extremity(limbed, limbed_result):
    _, pi = limbed
    pairs = limbed_result.pairs.vertex_pairs(limbed_result.features)
    assert len(pairs) >= 3
    assert all(pi[a] == b for a, b in pairs)
    assert len(limbed_result.paths) == len(pairs)


def test_recovers_symmetry_of_limbed_shape(limbed, limbed_result):
    mesh, pi = limbed
    report = correspondence_rate(mesh, limbed_result.sigma, ground_truth_pairs(pi))
    assert report.corr_rate >= 0.95


# flank of the torso, between arm and leg on the x > 0 side
FLANK = (0.65, 0.10, -0.30)


@pytest.mark.slow
@pytest.mark.parametrize("fraction", [0.05, 0.08])
def test_partial_mesh_with_holes(limbed, fraction):
    mesh, pi = limbed
    holed, remap = punch_holes(mesh, fraction=fraction, centre=FLANK)
    result = SymmetryDetector(RunConfig()).detect(holed, mesh_id=f"holes-{fraction}")
    assert result.pairs.c >= 3
    report = correspondence_rate(holed, result.sigma, ground_truth_pairs(pi, remap))
    assert report.corr_rate >= 0.85


@pytest.mark.slow
def test_post_eigensolve_runtime_scales_linearly():
    seconds = []
    for n_lat, n_lon in ((64, 120), (90, 168)):
        mesh, _ = mirrored_mesh(n_lat=n_lat, n_lon=n_lon)
        result = SymmetryDetector(RunConfig()).detect(mesh, mesh_id=f"n={mesh.n}")
        seconds.append(result.post_eigensolve_seconds)
    assert seconds[0] <= 60.0
    assert seconds[1] / seconds[0] <= 2.6
