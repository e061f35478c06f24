import json

import numpy as np
import pytest

from symmetria.errors import DegenerateSpectrumError, NoFeaturesError
from symmetria.mesh import build_adjacency
from symmetria.signatures import (
    LN10x4,
    detect_features,
    hks_descriptors,
    hks_energy,
    local_maxima,
    reference_time,
    sign_agreement,
    sign_matrix,
    time_samples,
)
from symmetria.spectral import SpectralBasis, assemble_operator, eigendecompose


@pytest.fixture(scope="module")
def mirrored_basis(small_mirrored):
    mesh, pi = small_mirrored
    return mesh, pi, build_adjacency(mesh), eigendecompose(assemble_operator(mesh), 13)


def test_hks_energy_requires_positive_time():
    basis = SpectralBasis(np.array([0.0, 1.0]), np.ones((3, 2)))
    with pytest.raises(ValueError):
        hks_energy(basis, 0.0)


def test_hks_energy_matches_direct_sum():
    rng = np.random.default_rng(3)
    phi = rng.standard_normal((5, 3))
    lam = np.array([0.0, 0.5, 2.0])
    basis = SpectralBasis(lam, phi)
    t = 0.7
    expected = sum(np.exp(-lam[i] * t) * phi[:, i] ** 2 for i in range(3))
    np.testing.assert_allclose(hks_energy(basis, t), expected)
    np.testing.assert_allclose(hks_descriptors(basis, [t])[:, 0], expected)


def test_reference_time_and_samples():
    basis = SpectralBasis(np.array([0.0, 2.0, 5.0, 10.0]), np.ones((4, 4)))
    assert reference_time(basis) == pytest.approx(LN10x4 / 2.0)
    times = time_samples(basis, h=50)
    assert times.shape == (50,)
    assert times[0] == pytest.approx(LN10x4 / 10.0)
    assert times[-1] == pytest.approx(LN10x4 / 2.0)
    ratios = times[1:] / times[:-1]
    np.testing.assert_allclose(ratios, ratios[0])


def test_reference_time_uses_sorted_spectrum():
    basis = SpectralBasis(np.array([10.0, 0.0, 2.0]), np.ones((4, 3)))
    assert reference_time(basis) == pytest.approx(LN10x4 / 2.0)


def test_degenerate_second_eigenvalue():
    basis = SpectralBasis(np.array([0.0, 0.0, 1.0]), np.ones((4, 3)))
    with pytest.raises(DegenerateSpectrumError):
        reference_time(basis)


def test_sign_matrix_counts_zero_as_positive():
    phi = np.array([[0.0, -1.0], [2.0, 0.0]])
    basis = SpectralBasis(np.array([0.0, 1.0]), phi)
    np.testing.assert_array_equal(sign_matrix(basis, [0, 1]), [[1, 1], [-1, 1]])


def test_constant_energy_has_no_features(tetrahedron):
    basis = SpectralBasis(np.array([0.0, 1.0, 2.0]), np.ones((4, 3)))
    with pytest.raises(NoFeaturesError):
        detect_features(tetrahedron, build_adjacency(tetrahedron), basis)


def _two_ring_of(adj, v):
    ring = set(adj.one_ring[v].tolist())
    for u in list(ring):
        ring.update(adj.one_ring[u].tolist())
    ring.discard(v)
    return ring


def test_features_come_in_mirror_pairs(mirrored_basis):
    mesh, pi, adj, basis = mirrored_basis
    features = detect_features(mesh, adj, basis)
    assert 2 <= features.d <= 25
    members = set(features.indices.tolist())
    for v in members:
        twin = int(pi[v])
        # twins inside each other's 2-ring compete for a single feature
        assert twin in members or twin in _two_ring_of(adj, v)
    assert np.all(np.diff(features.indices) > 0)
    assert features.H.shape == (50, features.d)
    assert features.S.shape == (13, features.d)
    # symmetric points have identical descriptors
    col = {v: i for i, v in enumerate(features.indices.tolist())}
    for v in members:
        if int(pi[v]) in col:
            np.testing.assert_allclose(features.H[:, col[v]], features.H[:, col[int(pi[v])]], rtol=1e-6)


def test_features_are_two_ring_maxima(mirrored_basis):
    mesh, _, adj, basis = mirrored_basis
    features = detect_features(mesh, adj, basis)
    energy = hks_energy(basis, features.t_h)
    for v in features.indices.tolist():
        ring = sorted(_two_ring_of(adj, v))
        assert energy[v] >= energy[ring].max()
        lower = [u for u in ring if u < v]
        assert not lower or energy[v] > energy[lower].max()
        assert energy[v] > energy[ring].min()


def test_d_max_keeps_most_energetic(mirrored_basis):
    mesh, _, adj, basis = mirrored_basis
    full = detect_features(mesh, adj, basis)
    top = detect_features(mesh, adj, basis, d_max=2)
    assert top.d == min(2, full.d)
    assert top.energy.min() >= np.sort(full.energy)[-2]


def test_feature_dump_is_json(mirrored_basis):
    mesh, _, adj, basis = mirrored_basis
    dumped = json.dumps(detect_features(mesh, adj, basis).to_dict())
    assert "indices" in json.loads(dumped)


def test_sign_agreement_is_high_on_smooth_mesh(mirrored_basis):
    mesh, _, _, basis = mirrored_basis
    agreement = sign_agreement(mesh, basis)
    assert 0.8 < agreement <= 1.0


def _twin_peaks(mesh, a, b, width=0.5):
    v = mesh.vertices
    da = np.sum((v - v[a]) ** 2, axis=1)
    db = np.sum((v - v[b]) ** 2, axis=1)
    return np.exp(-np.minimum(da, db) / width)


def test_equal_neighbouring_peaks_go_to_lower_index(sphere):
    adj = build_adjacency(sphere)
    partner = int(adj.one_ring[0][0])
    values = _twin_peaks(sphere, 0, partner)
    assert values[0] == values[partner] == 1.0
    np.testing.assert_array_equal(local_maxima(adj, values), [0])


def test_equal_peaks_away_from_vertex_zero(sphere):
    adj = build_adjacency(sphere)
    a = 300
    b = int(adj.one_ring[a][-1])
    np.testing.assert_array_equal(local_maxima(adj, _twin_peaks(sphere, a, b)), [min(a, b)])


def test_single_peak_is_the_only_maximum(sphere):
    adj = build_adjacency(sphere)
    values = _twin_peaks(sphere, 17, 17)
    np.testing.assert_array_equal(local_maxima(adj, values), [17])


def test_plateau_has_no_maximum(tetrahedron):
    assert local_maxima(build_adjacency(tetrahedron), np.ones(4)).size == 0
