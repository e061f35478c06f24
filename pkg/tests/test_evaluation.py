import csv
import json

import numpy as np
import pytest

from symmetria import evaluation
from symmetria.errors import EmptyGroundTruthError, ParseError, ValidationError
from symmetria.evaluation import (
    DatasetEntry,
    EvalReport,
    correspondence_rate,
    evaluate_dataset,
    mesh_rate,
    read_ground_truth,
    threshold,
    write_summary_csv,
)
from symmetria.mesh import TriangleMesh, surface_area


@pytest.fixture(scope="module")
def antipodes(sphere):
    v = sphere.vertices
    return np.argmin(v @ v.T, axis=1)


@pytest.fixture(scope="module")
def identity_gt(sphere):
    j = np.arange(sphere.n)
    return np.column_stack((j, j))


def test_threshold_is_one_at_area_twenty_pi(sphere):
    scale = np.sqrt(20.0 * np.pi / surface_area(sphere))
    scaled = TriangleMesh.from_arrays(sphere.vertices * scale, sphere.faces)
    assert threshold(scaled) == pytest.approx(1.0)


def test_perfect_map_scores_one(sphere, identity_gt):
    report = correspondence_rate(sphere, np.arange(sphere.n), identity_gt, name="identity")
    assert report.corr_rate == 1.0
    assert report.true_positives == sphere.n
    np.testing.assert_array_equal(report.per_pair_error, 0.0)
    assert json.loads(json.dumps(report.to_dict()))["name"] == "identity"


def test_far_map_scores_zero(sphere, identity_gt, antipodes):
    report = correspondence_rate(sphere, antipodes, identity_gt)
    assert report.corr_rate == 0.0
    assert report.to_dict()["mean_error"] is None


def test_half_correct_map(sphere, identity_gt, antipodes):
    sigma = np.arange(sphere.n)
    sigma[1::2] = antipodes[1::2]
    report = correspondence_rate(sphere, sigma, identity_gt)
    assert report.corr_rate == pytest.approx(np.ceil(sphere.n / 2) / sphere.n)


def test_nearby_partner_counts(sphere):
    # a one-ring neighbour is much closer than sqrt(4 pi / 20 pi)
    v = sphere.vertices
    neighbour = int(np.argsort(np.linalg.norm(v - v[0], axis=1))[1])
    sigma = np.arange(sphere.n)
    sigma[0] = neighbour
    report = correspondence_rate(sphere, sigma, [[0, 0]])
    assert report.corr_rate == 1.0
    assert 0.0 < report.per_pair_error[0] < report.threshold


def test_rate_input_errors(sphere):
    with pytest.raises(EmptyGroundTruthError):
        correspondence_rate(sphere, np.arange(sphere.n), np.zeros((0, 2)))
    with pytest.raises(ValidationError):
        correspondence_rate(sphere, np.arange(10), [[0, 0]])
    with pytest.raises(ValidationError):
        correspondence_rate(sphere, np.arange(sphere.n), [[0, sphere.n]])


def test_mesh_rate_is_strictly_above_three_quarters():
    assert mesh_rate([1.0, 0.8]) == 1.0
    assert mesh_rate([0.7, 0.8]) == 0.5
    assert mesh_rate([0.75]) == 0.0
    report = EvalReport(per_pair_error=np.zeros(3), threshold=1.0, corr_rate=0.9)
    assert mesh_rate([report, 0.1]) == 0.5
    with pytest.raises(ValueError):
        mesh_rate([])


def test_read_ground_truth(tmp_path):
    path = tmp_path / "gt.txt"
    path.write_text("# pairs\n0 3\n\n3 0\n")
    np.testing.assert_array_equal(read_ground_truth(path), [[0, 3], [3, 0]])

    one_based = tmp_path / "gt1.txt"
    one_based.write_text("1 4\n4 1\n")
    np.testing.assert_array_equal(read_ground_truth(one_based, one_based=True), [[0, 3], [3, 0]])
    with pytest.raises(ValidationError):
        read_ground_truth(path, one_based=True)
    with pytest.raises(ValidationError):
        read_ground_truth(one_based, n=4)


def test_read_ground_truth_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_ground_truth(tmp_path / "missing.txt")
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(EmptyGroundTruthError):
        read_ground_truth(empty)
    broken = tmp_path / "broken.txt"
    broken.write_text("0 1\n2\n")
    with pytest.raises(ParseError) as exc_info:
        read_ground_truth(broken)
    assert exc_info.value.line == 2


def test_evaluate_dataset_keeps_order(sphere, identity_gt, antipodes, tmp_path):
    entries = [
        DatasetEntry("perfect", sphere, np.arange(sphere.n), identity_gt),
        DatasetEntry("flipped", sphere, antipodes, identity_gt),
        DatasetEntry("again", sphere, np.arange(sphere.n), identity_gt[:10]),
    ]
    reports, rate = evaluate_dataset(entries, workers=2)
    assert [r.name for r in reports] == ["perfect", "flipped", "again"]
    assert [r.corr_rate for r in reports] == [1.0, 0.0, 1.0]
    assert rate == pytest.approx(2.0 / 3.0)

    path = write_summary_csv(reports, tmp_path / "summary.csv")
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [row["name"] for row in rows] == ["perfect", "flipped", "again"]
    assert float(rows[0]["corr_rate"]) == 1.0
    assert "geodesics" not in rows[0]


def test_evaluate_dataset_needs_entries():
    with pytest.raises(ValueError):
        evaluate_dataset([])


def test_public_names_live_in_the_module():
    for name in evaluation.__all__:
        obj = getattr(evaluation, name)
        if callable(obj):
            assert obj.__module__ == evaluation.__name__, name
