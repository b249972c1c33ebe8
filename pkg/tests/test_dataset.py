import numpy as np
import pytest

from plmmcv.models import Dataset, StandardizedMatrix, apply_standardization, center_outcome, standardize
from plmmcv.utils import DataValidationError


@pytest.fixture
def design():
    rng = np.random.default_rng(7)
    return rng.normal(loc=3.0, scale=2.0, size=(30, 6))


# ============== Tests for Dataset ==============


def test_dataset_defaults():
    dataset = Dataset(X=np.arange(6.0).reshape(3, 2), y=[1.0, 2.0, 4.0])

    assert dataset.n == 3
    assert dataset.p == 2
    assert dataset.feature_names == ("x1", "x2")
    assert dataset.row_ids == ("1", "2", "3")


def test_dataset_arrays_are_read_only():
    dataset = Dataset(X=np.ones((3, 2)), y=np.zeros(3))

    with pytest.raises(ValueError):
        dataset.X[0, 0] = 5.0


@pytest.mark.parametrize(
    "X, y",
    [
        (np.ones(4), np.ones(4)),
        (np.ones((1, 3)), np.ones(1)),
        (np.ones((4, 2)), np.ones(3)),
        (np.array([[1.0, np.nan], [2.0, 3.0]]), np.ones(2)),
        (np.ones((2, 2)), np.array([1.0, np.inf])),
    ],
)
def test_dataset_invalid_shapes_or_values(X, y):
    with pytest.raises(DataValidationError):
        Dataset(X=X, y=y)


def test_dataset_duplicate_feature_names():
    with pytest.raises(DataValidationError, match="unique"):
        Dataset(X=np.ones((3, 2)), y=np.ones(3), feature_names=("a", "a"))


def test_dataset_wrong_row_id_count():
    with pytest.raises(DataValidationError):
        Dataset(X=np.ones((3, 2)), y=np.ones(3), row_ids=("a", "b"))


def test_dataset_subset_keeps_labels():
    dataset = Dataset(X=np.arange(8.0).reshape(4, 2), y=np.arange(4.0), row_ids=("a", "b", "c", "d"))

    subset = dataset.subset(np.array([3, 1]))

    assert subset.row_ids == ("d", "b")
    assert subset.feature_names == dataset.feature_names
    np.testing.assert_array_equal(subset.y, [3.0, 1.0])


# ============== Tests for standardize ==============


def test_standardize_unit_mean_square(design):
    Xstd = standardize(design)

    np.testing.assert_allclose(Xstd.values.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.mean(Xstd.values**2, axis=0), 1.0, atol=1e-12)
    assert Xstd.n_active == design.shape[1]


def test_standardize_screens_constant_column(design):
    X = design.copy()
    X[:, 2] = 4.0

    Xstd = standardize(X)

    assert not Xstd.active[2]
    assert Xstd.n_active == 5
    np.testing.assert_array_equal(Xstd.values[:, 2], 0.0)
    assert Xstd.active_values().shape == (30, 5)


def test_standardize_without_centering(design):
    Xstd = standardize(design, center=False)

    np.testing.assert_array_equal(Xstd.centers, 0.0)
    np.testing.assert_allclose(Xstd.scales, np.sqrt(np.mean(design**2, axis=0)))


def test_standardize_negative_threshold(design):
    with pytest.raises(ValueError):
        standardize(design, variance_threshold=-1.0)


def test_standardize_single_row():
    with pytest.raises(DataValidationError):
        standardize(np.ones((1, 3)))


# ============== Tests for apply_standardization ==============


def test_apply_standardization_reproduces_training_values(design):
    Xstd = standardize(design)

    again = apply_standardization(design, Xstd.centers, Xstd.scales, Xstd.active)

    np.testing.assert_array_equal(again, Xstd.values)


def test_apply_standardization_does_not_recenter(design):
    Xstd = standardize(design)
    shifted = design[:5] + 10.0

    out = apply_standardization(shifted, Xstd.centers, Xstd.scales, Xstd.active)

    assert np.all(out.mean(axis=0) > 0)


def test_apply_standardization_column_mismatch(design):
    Xstd = standardize(design)

    with pytest.raises(DataValidationError):
        apply_standardization(design[:, :4], Xstd.centers, Xstd.scales, Xstd.active)


def test_standardization_parameters_file(design, tmp_path):
    Xstd = standardize(design)
    file_path = tmp_path / "standardization.json"

    Xstd.save_parameters(file_path)
    centers, scales, active = StandardizedMatrix.load_parameters(file_path)

    np.testing.assert_allclose(centers, Xstd.centers)
    np.testing.assert_allclose(scales, Xstd.scales)
    np.testing.assert_array_equal(active, Xstd.active)


def test_standardization_parameters_missing_key(tmp_path):
    file_path = tmp_path / "broken.json"
    file_path.write_text('{"centers": [0.0], "scales": [1.0]}')

    with pytest.raises(DataValidationError, match="active"):
        StandardizedMatrix.load_parameters(file_path)


# ============== Tests for center_outcome ==============


def test_center_outcome_small_values():
    centered, mean = center_outcome(np.array([1.0, 2.0, 6.0]))

    np.testing.assert_allclose(centered, [-2.0, -1.0, 3.0])
    assert mean == pytest.approx(3.0)


@pytest.mark.parametrize("offset", [1e9, 1e10, 1e12])
def test_center_outcome_large_offset(offset):
    y = offset + np.random.default_rng(2).normal(size=60)

    centered, mean = center_outcome(y)

    assert abs(centered.mean()) <= 1e-12
    assert mean == pytest.approx(offset, rel=1e-12)
    np.testing.assert_allclose(centered + mean, y, rtol=1e-14)
