"""
Gaussian normalcy model over cube feature vectors.

Scores are the Mahalanobis quadratic form (x - mu)^T Sigma^-1 (x - mu), evaluated with
a Cholesky solve. Models merge batch-wise:

    mu_c    = m mu_a / (m + n) + n mu_b / (m + n)
    Sigma_c = ((m - 1) Sigma_a + n Sigma_b) / (m + n - 1)
"""
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from utils.data_manager import DataManager
from utils.errors import (
    ConfigurationError,
    DataError,
    DimensionMismatchError,
    InsufficientDataError,
    NumericError,
)
from utils.logger import Logger
from utils.schemas import GAUSSIAN_MODEL_SCHEMA, SCHEMA_VERSION

logger = Logger.get_logger(__name__)

COVARIANCE_RIDGE = 1e-6
DEFAULT_PERCENTILE = 99.0
# relative to max(1, largest |entry|) and max(1, largest eigenvalue)
SYMMETRY_TOL = 1e-12
PSD_TOL = -1e-10


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """
    Normalcy model.

    Attributes:
        mu: (D,) mean feature vector
        sigma: (D, D) covariance, 1/(m-1) normalisation plus ridge
        per_feature_sigma: (D,) per-feature standard deviations
        m: number of samples the model summarises
    """

    mu: np.ndarray
    sigma: np.ndarray
    per_feature_sigma: np.ndarray
    m: int

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.array(self.sigma, dtype=np.float64)
        pfs = np.array(self.per_feature_sigma, dtype=np.float64).reshape(-1)
        dim = mu.shape[0]
        if dim < 1 or sigma.shape != (dim, dim) or pfs.shape != (dim,):
            raise DimensionMismatchError(
                f"inconsistent model shapes: mu {mu.shape}, sigma {sigma.shape}, "
                f"per_feature_sigma {pfs.shape}"
            )
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma)) and np.all(np.isfinite(pfs))):
            raise DataError("model parameters must be finite")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOL * scale:
            raise DataError("covariance is not symmetric")
        eigenvalues = scipy.linalg.eigvalsh(sigma)
        if eigenvalues[0] < PSD_TOL * max(1.0, float(eigenvalues[-1])):
            raise DataError(
                f"covariance is not positive semidefinite: smallest eigenvalue {eigenvalues[0]:.3g}, "
                f"largest {eigenvalues[-1]:.3g}"
            )
        if np.any(pfs < 0):
            raise DataError("per-feature standard deviations must be >= 0")
        if int(self.m) < 1:
            raise DataError(f"sample count must be >= 1, got {self.m}")
        for name, value in (("mu", mu), ("sigma", sigma), ("per_feature_sigma", pfs)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "m", int(self.m))

    @property
    def dim(self) -> int:
        return int(self.mu.shape[0])

    @cached_property
    def _cholesky(self) -> Tuple[np.ndarray, bool]:
        try:
            return scipy.linalg.cho_factor(self.sigma, lower=True)
        except np.linalg.LinAlgError as e:
            raise NumericError(f"covariance is not positive definite: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "gaussian",
            "dim": self.dim,
            "m": self.m,
            "mu": [float(v) for v in self.mu],
            "sigma": [float(v) for v in self.sigma.reshape(-1)],
            "per_feature_sigma": [float(v) for v in self.per_feature_sigma],
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "GaussianModel":
        DataManager.validate(document, GAUSSIAN_MODEL_SCHEMA, "gaussian model")
        dim = document["dim"]
        if len(document["mu"]) != dim or len(document["sigma"]) != dim * dim \
                or len(document["per_feature_sigma"]) != dim:
            raise DimensionMismatchError(f"gaussian model arrays do not match dim={dim}")
        return cls(
            mu=np.array(document["mu"]),
            sigma=np.array(document["sigma"]).reshape(dim, dim),
            per_feature_sigma=np.array(document["per_feature_sigma"]),
            m=document["m"],
        )


@dataclass(frozen=True)
class AnomalyDecision:
    score: float
    threshold: float
    is_anomalous: bool


def _as_feature_matrix(features: Any) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatchError(f"features must be an L x D matrix, got shape {X.shape}")
    if X.shape[1] < 1:
        raise DimensionMismatchError("features need at least one column")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")
    return X


def _covariance(X: np.ndarray) -> np.ndarray:
    sigma = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
    sigma = 0.5 * (sigma + sigma.T)
    return sigma + COVARIANCE_RIDGE * np.eye(X.shape[1])


def fit_gaussian(features: Any) -> GaussianModel:
    """
    Fit a normalcy model to L feature vectors.

    Args:
        features: (L, D) matrix, L >= 2, all finite

    Returns:
        GaussianModel with column means, 1/L per-feature standard deviations and a
        1/(L-1) covariance plus ridge
    """
    X = _as_feature_matrix(features)
    if X.shape[0] < 2:
        raise InsufficientDataError(f"need at least 2 feature vectors, got {X.shape[0]}")

    model = GaussianModel(
        mu=X.mean(axis=0),
        per_feature_sigma=X.std(axis=0, ddof=0),
        sigma=_covariance(X),
        m=X.shape[0],
    )
    logger.info(f"Fitted Gaussian model: D={model.dim}, m={model.m}")
    return model


def _check_dim(model: GaussianModel, x: np.ndarray) -> None:
    if x.shape[-1] != model.dim:
        raise DimensionMismatchError(f"feature dimension {x.shape[-1]} != model dimension {model.dim}")


def mahalanobis(model: GaussianModel, x: Any) -> float:
    """
    Mahalanobis score of one feature vector.

    Args:
        model: Normalcy model
        x: (D,) feature vector

    Returns:
        Non-negative score; exactly 0 when x == mu
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    _check_dim(model, x)
    diff = x - model.mu
    solved = scipy.linalg.cho_solve(model._cholesky, diff)
    score = float(diff @ solved)
    if not np.isfinite(score):
        raise NumericError("non-finite Mahalanobis score")
    return max(score, 0.0)


def mahalanobis_batch(model: GaussianModel, features: Any) -> np.ndarray:
    """
    Score every row of a feature matrix.

    Rows are solved one at a time so a vector scores identically whether it is
    scored alone or in a batch.
    """
    X = _as_feature_matrix(features)
    _check_dim(model, X)
    return np.array([mahalanobis(model, row) for row in X])


def decide(model: GaussianModel, x: Any, threshold: float) -> AnomalyDecision:
    """Threshold decision; anomalous only when the score is strictly greater."""
    score = mahalanobis(model, x)
    return AnomalyDecision(score=score, threshold=float(threshold), is_anomalous=score > threshold)


def calibrate_threshold(model: GaussianModel, training_features: Any,
                        percentile: float = DEFAULT_PERCENTILE) -> float:
    """
    Threshold at a percentile of the training scores.

    Args:
        model: Normalcy model
        training_features: (L, D) training rows, L >= 1
        percentile: In (0, 100]; linear interpolation between order statistics

    Returns:
        Threshold value
    """
    if not 0.0 < percentile <= 100.0:
        raise ConfigurationError(f"percentile must be in (0, 100], got {percentile}")
    X = np.asarray(training_features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InsufficientDataError("threshold calibration needs at least one training row")
    scores = mahalanobis_batch(model, X)
    threshold = float(np.percentile(scores, percentile, method="linear"))
    logger.info(f"Calibrated threshold {threshold:.6g} at percentile {percentile} over {len(scores)} rows")
    return threshold


def merge_models(a: GaussianModel, b_features: Any) -> GaussianModel:
    """
    Merge a model with a new batch of n feature vectors.

    Sigma_b is the batch covariance computed exactly as in ``fit_gaussian``; the merged
    covariance keeps the (m - 1) Sigma_a + n Sigma_b numerator as written.

    Args:
        a: Existing model summarising m samples
        b_features: (n, D) batch, n >= 2

    Returns:
        Model with m + n samples and per_feature_sigma = sqrt(diag(sigma))
    """
    B = _as_feature_matrix(b_features)
    _check_dim(a, B)
    n = B.shape[0]
    if n < 2:
        raise InsufficientDataError(f"merge needs a batch of at least 2 vectors, got {n}")

    m = a.m
    mu_b = B.mean(axis=0)
    sigma_b = _covariance(B)

    mu_c = m * a.mu / (m + n) + n * mu_b / (m + n)
    sigma_c = ((m - 1) * a.sigma + n * sigma_b) / (m + n - 1)

    merged = GaussianModel(mu=mu_c, sigma=sigma_c, per_feature_sigma=np.sqrt(np.diag(sigma_c)), m=m + n)
    logger.info(f"Merged model: m={m} + n={n} -> {merged.m}")
    return merged


@dataclass(frozen=True)
class DetectorSettings:
    """Detector metadata stored next to a serialized model."""

    threshold: float
    percentile: float
    cube_p: int
    cube_q: int
    spatial_stride: int
    temporal_stride: int
    state_dim: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "threshold": float(self.threshold),
            "percentile": float(self.percentile),
            "cube_p": self.cube_p,
            "cube_q": self.cube_q,
            "spatial_stride": self.spatial_stride,
            "temporal_stride": self.temporal_stride,
            "state_dim": self.state_dim,
        }


def save_gaussian_model(model: GaussianModel, path: Union[str, Path],
                        detector: Optional[DetectorSettings] = None) -> None:
    document = model.to_dict()
    if detector is not None:
        document["detector"] = detector.to_dict()
    DataManager.save_json(document, path)


def load_gaussian_model(path: Union[str, Path]) -> Tuple[GaussianModel, Optional[DetectorSettings]]:
    """
    Load a model file.

    Returns:
        (model, detector settings or None)

    Raises:
        SchemaError: Wrong schema_version or malformed document
    """
    document = DataManager.load_json(path)
    model = GaussianModel.from_dict(document)
    detector = DetectorSettings(**document["detector"]) if "detector" in document else None
    logger.info(f"Loaded Gaussian model from {path}: D={model.dim}, m={model.m}")
    return model, detector
