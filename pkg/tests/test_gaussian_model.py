"""
Gaussian normalcy model: fitting, scoring, merging, thresholds and files.
"""
import json
import sys

import numpy as np
import pytest
import allure

from models.gaussian import (
    COVARIANCE_RIDGE,
    DetectorSettings,
    GaussianModel,
    calibrate_threshold,
    decide,
    fit_gaussian,
    load_gaussian_model,
    mahalanobis,
    mahalanobis_batch,
    merge_models,
    save_gaussian_model,
)
from utils.data_manager import DataManager
from utils.errors import (
    ConfigurationError,
    DataError,
    DimensionMismatchError,
    InsufficientDataError,
    SchemaError,
)
from utils.schemas import GAUSSIAN_MODEL_SCHEMA


def _model(mu, sigma, m=10):
    sigma = np.asarray(sigma, dtype=float)
    return GaussianModel(mu=mu, sigma=sigma, per_feature_sigma=np.sqrt(np.diag(sigma)), m=m)


def _identity_model(dim, m=10):
    return _model(np.zeros(dim), np.eye(dim), m)


def _formula_covariance(B):
    return np.cov(B, rowvar=False, ddof=1).reshape(B.shape[1], B.shape[1]) + COVARIANCE_RIDGE * np.eye(B.shape[1])


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Gaussian Model")
class TestFitGaussian:
    """Estimating the normalcy model."""

    @allure.story("Estimators")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Two rows: 1/L per-feature deviation, 1/(L-1) covariance plus ridge")
    @pytest.mark.smoke
    @pytest.mark.critical
    def test_two_rows(self):
        model = fit_gaussian([[0.0, 0.0], [2.0, 0.0]])

        assert np.allclose(model.mu, [1.0, 0.0])
        assert np.allclose(model.per_feature_sigma, [1.0, 0.0])
        assert model.sigma[0, 0] == pytest.approx(2.0 + COVARIANCE_RIDGE, abs=1e-15)
        assert model.sigma[1, 1] == pytest.approx(COVARIANCE_RIDGE, abs=1e-15)
        assert model.m == 2

    @allure.story("Estimators")
    @allure.title("Identical rows give zero deviations and a ridge-only covariance")
    @pytest.mark.regression
    def test_identical_rows(self):
        model = fit_gaussian(np.tile([3.0, -1.0, 0.5], (6, 1)))

        assert np.array_equal(model.per_feature_sigma, np.zeros(3))
        assert np.allclose(model.sigma, COVARIANCE_RIDGE * np.eye(3), atol=1e-18)
        assert mahalanobis(model, [3.0, -1.0, 0.5]) == 0.0

    @allure.story("Estimators")
    @allure.title("Covariance is symmetric and positive semidefinite")
    @pytest.mark.regression
    def test_symmetric_psd(self, rng, soft_assert):
        for _ in range(20):
            dim = int(rng.integers(1, 8))
            model = fit_gaussian(rng.standard_normal((int(rng.integers(2, 30)), dim)))
            soft_assert.assert_true(np.max(np.abs(model.sigma - model.sigma.T)) <= 1e-12, "symmetric")
            soft_assert.assert_true(np.min(np.linalg.eigvalsh(model.sigma)) >= -1e-10, "psd")
        soft_assert.assert_all()

    @allure.story("Estimators")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Features around 1e8, collinear ones included, still fit")
    @pytest.mark.regression
    def test_large_scale_features(self, rng):
        a = rng.standard_normal(40) * 1e8
        X = np.column_stack([a, 2.0 * a, rng.standard_normal(40) * 1e8])

        model = fit_gaussian(X)
        eigenvalues = np.linalg.eigvalsh(model.sigma)

        assert np.array_equal(model.sigma, model.sigma.T)
        assert eigenvalues[0] >= -1e-10 * eigenvalues[-1]
        assert eigenvalues[-1] > 1e16

    @allure.story("Estimators")
    @allure.title("Scores of well-conditioned features do not depend on their units")
    @pytest.mark.regression
    def test_scores_unit_free(self, rng):
        X = rng.standard_normal((50, 4))
        x = rng.standard_normal(4)

        small = fit_gaussian(X)
        large = fit_gaussian(X * 1e8)

        assert mahalanobis(large, large.mu) == 0.0
        assert mahalanobis(large, x * 1e8) == pytest.approx(mahalanobis(small, x), rel=1e-4)

    @allure.story("Validation")
    @allure.title("Fewer than two rows or non-finite values are rejected")
    @pytest.mark.regression
    def test_rejects_bad_input(self):
        with pytest.raises(InsufficientDataError):
            fit_gaussian([[1.0, 2.0]])
        with pytest.raises(DataError):
            fit_gaussian([[1.0, np.nan], [0.0, 0.0]])
        with pytest.raises(DimensionMismatchError):
            fit_gaussian([1.0, 2.0, 3.0])

    @allure.story("Validation")
    @allure.title("An asymmetric covariance cannot form a model")
    @pytest.mark.regression
    def test_rejects_asymmetric_sigma(self):
        with pytest.raises(DataError, match="symmetric"):
            GaussianModel(mu=[0, 0], sigma=[[1, 0.5], [0, 1]], per_feature_sigma=[1, 1], m=3)


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Gaussian Model")
class TestMahalanobis:
    """Scoring feature vectors."""

    @allure.story("Scores")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("x = mu scores exactly zero")
    @pytest.mark.smoke
    def test_zero_at_mean(self, rng):
        model = fit_gaussian(rng.standard_normal((20, 4)))

        assert mahalanobis(model, model.mu) == 0.0

    @allure.story("Scores")
    @allure.title("Identity covariance reduces to the squared norm: (3, 4) -> 25")
    @pytest.mark.smoke
    def test_identity_covariance(self):
        assert mahalanobis(_identity_model(2), [3.0, 4.0]) == pytest.approx(25.0, abs=1e-12)

    @allure.story("Scores")
    @allure.title("Diagonal covariance diag(2, 0.5) at (3, 1) around (1, 0) -> 4")
    @pytest.mark.regression
    def test_diagonal_covariance(self):
        model = _model([1.0, 0.0], np.diag([2.0, 0.5]))

        assert mahalanobis(model, [3.0, 1.0]) == pytest.approx(4.0, abs=1e-12)

    @allure.story("Scores")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("100 random vectors under identity covariance match the squared norm")
    @pytest.mark.regression
    def test_squared_norm_oracle(self, rng, soft_assert):
        for _ in range(100):
            dim = int(rng.integers(1, 21))
            x = rng.standard_normal(dim) * 3
            soft_assert.assert_close(mahalanobis(_identity_model(dim), x), float(x @ x),
                                     abs_tol=1e-10, rel_tol=1e-12, message=f"D={dim}")
        soft_assert.assert_all()

    @allure.story("Scores")
    @allure.title("Batch scoring equals scoring rows one by one")
    @pytest.mark.regression
    def test_batch_matches_single(self, rng):
        model = fit_gaussian(rng.standard_normal((30, 5)))
        X = rng.standard_normal((12, 5))

        batch = mahalanobis_batch(model, X)

        assert np.array_equal(batch, [mahalanobis(model, row) for row in X])
        assert np.all(batch >= 0)

    @allure.story("Validation")
    @allure.title("Wrong feature dimension is reported")
    @pytest.mark.regression
    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mahalanobis(_identity_model(3), [1.0, 2.0])


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Gaussian Model")
class TestMergeModels:
    """Batch-wise model merging."""

    @allure.story("Means")
    @allure.title("Equal means merge to the same mean")
    @pytest.mark.smoke
    def test_equal_means(self):
        a = _model([2.0, 2.0], np.eye(2), m=5)
        batch = np.array([[1, 1], [3, 3], [2, 2], [1, 3], [3, 1]], dtype=float)

        merged = merge_models(a, batch)

        assert np.allclose(merged.mu, [2.0, 2.0], atol=1e-12)
        assert merged.m == 10

    @allure.story("Means")
    @allure.title("Count-weighted average: 3 at 0 and 3 at 6 merge to 3")
    @pytest.mark.regression
    def test_weighted_mean(self):
        a = _model([0.0, 0.0], np.eye(2), m=3)
        batch = np.array([[5, 5], [6, 6], [7, 7]], dtype=float)

        assert np.allclose(merge_models(a, batch).mu, [3.0, 3.0], atol=1e-12)

    @allure.story("Covariances")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Sigma_a = I, m = 3 with a 3I batch of 3 gives 2.2 I")
    @pytest.mark.critical
    def test_covariance_formula_example(self):
        a = _model([0.0, 0.0], np.eye(2), m=3)
        root3 = np.sqrt(3.0)
        batch = np.array([[2.0, 0.0], [-1.0, root3], [-1.0, -root3]])

        merged = merge_models(a, batch)

        assert np.allclose(np.cov(batch, rowvar=False), 3.0 * np.eye(2), atol=1e-12)
        assert np.allclose(merged.sigma, 2.2 * np.eye(2), atol=1e-5)
        expected = (2 * np.eye(2) + 3 * _formula_covariance(batch)) / 5
        assert np.allclose(merged.sigma, expected, atol=1e-12)
        assert np.allclose(merged.per_feature_sigma, np.sqrt(np.diag(merged.sigma)))

    @allure.story("Covariances")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("100 random merges agree with the merge formula to 1e-12")
    @pytest.mark.regression
    def test_formula_oracle(self, rng, soft_assert):
        for _ in range(100):
            dim = int(rng.integers(1, 7))
            a = fit_gaussian(rng.standard_normal((int(rng.integers(2, 20)), dim)))
            B = rng.standard_normal((int(rng.integers(2, 12)), dim)) + rng.standard_normal(dim)
            m, n = a.m, B.shape[0]

            merged = merge_models(a, B)

            soft_assert.assert_equal(merged.m, m + n, "count additivity")
            soft_assert.assert_allclose(merged.mu, m * a.mu / (m + n) + n * B.mean(axis=0) / (m + n),
                                        atol=1e-12, message="mean")
            soft_assert.assert_allclose(merged.sigma,
                                        ((m - 1) * a.sigma + n * _formula_covariance(B)) / (m + n - 1),
                                        atol=1e-12, message="covariance")
        soft_assert.assert_all()

    @allure.story("Validation")
    @allure.title("Batches need two rows of the model's dimension")
    @pytest.mark.regression
    def test_rejects_bad_batches(self):
        a = _identity_model(2)

        with pytest.raises(InsufficientDataError):
            merge_models(a, [[1.0, 2.0]])
        with pytest.raises(DimensionMismatchError):
            merge_models(a, np.zeros((4, 3)))


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Gaussian Model")
class TestThresholds:
    """Decisions and threshold calibration."""

    @allure.story("Decisions")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Score equal to the threshold is not anomalous")
    @pytest.mark.smoke
    def test_strict_boundary(self):
        model = _identity_model(2)

        at_mean = decide(model, [0.0, 0.0], 0.0)

        assert at_mean.score == 0.0
        assert not at_mean.is_anomalous
        assert decide(model, [3.0, 4.0], 24.0).is_anomalous
        assert not decide(model, [0.0, 5.0], 25.0).is_anomalous

    @allure.story("Decisions")
    @allure.title("The largest finite threshold never fires")
    @pytest.mark.regression
    def test_max_threshold(self, rng):
        model = _identity_model(3)

        assert not any(decide(model, x * 1e6, sys.float_info.max).is_anomalous
                       for x in rng.standard_normal((10, 3)))

    @allure.story("Calibration")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Scores {1, 2, 3, 4}: percentile 100 -> 4, percentile 50 -> 2.5")
    @pytest.mark.smoke
    def test_percentiles(self):
        model = _model([0.0], [[1.0]], m=4)
        X = np.sqrt([[1.0], [2.0], [3.0], [4.0]])

        assert calibrate_threshold(model, X, 100) == pytest.approx(4.0, abs=1e-12)
        assert calibrate_threshold(model, X, 50) == pytest.approx(2.5, abs=1e-12)

    @allure.story("Calibration")
    @allure.title("A single training score is the threshold at any percentile")
    @pytest.mark.regression
    @pytest.mark.parametrize("percentile", [1, 50, 99, 100])
    def test_single_score(self, percentile):
        model = _model([0.0], [[1.0]], m=4)

        assert calibrate_threshold(model, [[np.sqrt(7.0)]], percentile) == pytest.approx(7.0, abs=1e-12)

    @allure.story("Calibration")
    @allure.title("Percentile-100 threshold leaves every training row Normal")
    @pytest.mark.regression
    def test_max_percentile_covers_training(self, rng):
        X = rng.standard_normal((40, 4))
        model = fit_gaussian(X)

        threshold = calibrate_threshold(model, X, 100)

        assert not any(decide(model, row, threshold).is_anomalous for row in X)

    @allure.story("Validation")
    @allure.title("Percentiles outside (0, 100] and empty training sets are rejected")
    @pytest.mark.regression
    def test_rejects_bad_calibration(self):
        model = _identity_model(1)

        for percentile in (0, -5, 100.5):
            with pytest.raises(ConfigurationError):
                calibrate_threshold(model, [[1.0]], percentile)
        with pytest.raises(InsufficientDataError):
            calibrate_threshold(model, np.zeros((0, 1)))


@allure.epic("Crowd Anomaly Pipeline")
@allure.feature("Gaussian Model")
class TestModelFiles:
    """Serialized model documents."""

    @allure.story("Files")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("Saved models reload exactly with their detector settings")
    @pytest.mark.smoke
    def test_save_and_load(self, tmp_path, rng):
        model = fit_gaussian(rng.standard_normal((15, 3)))
        settings = DetectorSettings(threshold=3.25, percentile=100.0, cube_p=8, cube_q=8,
                                    spatial_stride=8, temporal_stride=8, state_dim=5)
        path = tmp_path / "model.json"

        save_gaussian_model(model, path, settings)
        loaded, loaded_settings = load_gaussian_model(path)

        assert np.array_equal(loaded.mu, model.mu)
        assert np.array_equal(loaded.sigma, model.sigma)
        assert loaded.m == model.m
        assert loaded_settings == settings
        DataManager.validate(json.loads(path.read_text()), GAUSSIAN_MODEL_SCHEMA, "gaussian model")

    @allure.story("Files")
    @allure.title("A model without detector settings loads with None")
    @pytest.mark.regression
    def test_bare_model(self, tmp_path):
        path = tmp_path / "model.json"
        save_gaussian_model(_identity_model(2), path)

        _, settings = load_gaussian_model(path)

        assert settings is None

    @allure.story("Files")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.title("A mismatched schema_version fails loudly")
    @pytest.mark.regression
    def test_schema_version_mismatch(self, tmp_path):
        path = tmp_path / "model.json"
        save_gaussian_model(_identity_model(2), path)
        document = json.loads(path.read_text())
        document["schema_version"] = 2
        path.write_text(json.dumps(document))

        with pytest.raises(SchemaError, match="schema_version"):
            load_gaussian_model(path)

    @allure.story("Files")
    @allure.title("Arrays that disagree with dim are rejected")
    @pytest.mark.regression
    def test_dim_mismatch(self, tmp_path):
        path = tmp_path / "model.json"
        save_gaussian_model(_identity_model(2), path)
        document = json.loads(path.read_text())
        document["mu"] = [0.0]
        path.write_text(json.dumps(document))

        with pytest.raises(DimensionMismatchError):
            load_gaussian_model(path)
