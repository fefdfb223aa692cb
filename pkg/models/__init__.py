"""Models package: dynamic textures, Gaussian normalcy models and the event classifier."""
from .dyntex import LdsParams, extract_features, feature_dim, fit_lds, lds_features, simulate_lds
from .gaussian import (
    AnomalyDecision,
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
from .maxent import (
    ConjunctionFeatureMap,
    MaxEntModel,
    TrainConfig,
    gradient,
    label_probs,
    load_maxent_model,
    predict,
    save_maxent_model,
    train,
)

__all__ = [
    "LdsParams",
    "extract_features",
    "feature_dim",
    "fit_lds",
    "lds_features",
    "simulate_lds",
    "AnomalyDecision",
    "DetectorSettings",
    "GaussianModel",
    "calibrate_threshold",
    "decide",
    "fit_gaussian",
    "load_gaussian_model",
    "mahalanobis",
    "mahalanobis_batch",
    "merge_models",
    "save_gaussian_model",
    "ConjunctionFeatureMap",
    "MaxEntModel",
    "TrainConfig",
    "gradient",
    "label_probs",
    "load_maxent_model",
    "predict",
    "save_maxent_model",
    "train",
]
