"""
Log-linear (maximum entropy) event classifier.

p(y | x; w) is proportional to exp(w . F(x, y)). The feature map is the label
conjunction: one copy of [x, 1] per label, with only the block of label y active.
The log-likelihood gradient is

    d/dw_j log p(y | x; w) = F_j(x, y) - sum_y' p(y' | x; w) F_j(x, y')
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from utils.data_manager import DataManager
from utils.errors import (
    ConfigurationError,
    DataError,
    DimensionMismatchError,
    NumericError,
    UnknownLabelError,
)
from utils.logger import Logger
from utils.schemas import MAXENT_MODEL_SCHEMA, SCHEMA_VERSION

logger = Logger.get_logger(__name__)

Example = Tuple[Any, str]


@dataclass(frozen=True)
class ConjunctionFeatureMap:
    """F(x, y): [x, 1] placed in label y's block of a |Y| * (dims + 1) vector."""

    dims: int
    n_labels: int

    @property
    def size(self) -> int:
        return self.n_labels * (self.dims + 1)

    def __call__(self, x: Any, label_index: int) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dims:
            raise DimensionMismatchError(f"feature vector has {x.shape[0]} entries, expected {self.dims}")
        out = np.zeros(self.size)
        start = label_index * (self.dims + 1)
        out[start:start + self.dims] = x
        out[start + self.dims] = 1.0
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "label-conjunction", "dims": self.dims, "n_labels": self.n_labels}


@dataclass(frozen=True, eq=False)
class MaxEntModel:
    """
    Attributes:
        labels: ordered label set Y; order breaks prediction ties
        w: weight vector of length |Y| * (dims + 1)
        feature_map: the F(x, y) construction the weights index
    """

    labels: Tuple[str, ...]
    w: np.ndarray
    feature_map: ConjunctionFeatureMap

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) < 2 or len(set(labels)) != len(labels):
            raise ConfigurationError(f"need at least two distinct labels, got {labels}")
        w = np.array(self.w, dtype=np.float64).reshape(-1)
        if w.shape[0] != self.feature_map.size:
            raise DimensionMismatchError(f"|w| = {w.shape[0]}, feature map size {self.feature_map.size}")
        if not np.all(np.isfinite(w)):
            raise DataError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "w", w)

    @classmethod
    def zeros(cls, labels: Sequence[str], dims: int) -> "MaxEntModel":
        fmap = ConjunctionFeatureMap(dims=dims, n_labels=len(labels))
        return cls(tuple(labels), np.zeros(fmap.size), fmap)

    @property
    def weight_matrix(self) -> np.ndarray:
        """Weights as (|Y|, dims + 1), row k being label k's block."""
        return self.w.reshape(len(self.labels), self.feature_map.dims + 1)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabelError(f"unknown label {label!r}; known labels {list(self.labels)}") from None

    def features(self, x: Any, label: str) -> np.ndarray:
        return self.feature_map(x, self.label_index(label))


def _augment(x: Any, dims: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != dims:
        raise DimensionMismatchError(f"feature vector has {x.shape[-1]} entries, expected {dims}")
    if not np.all(np.isfinite(x)):
        raise DataError("feature vector must be finite")
    return np.concatenate([x, np.ones(x.shape[:-1] + (1,))], axis=-1)


def _log_probs(model: MaxEntModel, x: Any) -> np.ndarray:
    scores = model.weight_matrix @ _augment(x, model.feature_map.dims)
    return scores - logsumexp(scores)


def label_probs(model: MaxEntModel, x: Any) -> np.ndarray:
    """
    Label distribution p(y | x; w), aligned with ``model.labels``.

    The log-sum-exp normalisation subtracts the maximum score first, so large scores
    do not overflow.
    """
    return np.exp(_log_probs(model, x))


def log_prob(model: MaxEntModel, x: Any, y: str) -> float:
    return float(_log_probs(model, x)[model.label_index(y)])


def gradient(model: MaxEntModel, x: Any, y: str) -> np.ndarray:
    """
    Gradient of log p(y | x; w) with respect to w.

    Args:
        model: Classifier
        x: Feature vector
        y: True label

    Returns:
        F(x, y) - sum_y' p(y' | x) F(x, y'), length |w|
    """
    observed = model.features(x, y)
    probs = label_probs(model, x)
    expected = sum(p * model.feature_map(x, k) for k, p in enumerate(probs))
    return observed - expected


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.l2 < 0:
            raise ConfigurationError(f"l2 must be >= 0, got {self.l2}")
        # w <- (1 - lr*l2) w + lr*grad oscillates without bound once lr*l2 >= 2
        if self.learning_rate * self.l2 >= 2.0:
            raise ConfigurationError(
                f"--learning-rate ({self.learning_rate}) times --l2 ({self.l2}) must be below 2"
            )


def _design(data: Sequence[Example], labels: Tuple[str, ...]) -> Tuple[np.ndarray, np.ndarray]:
    X = np.array([np.asarray(x, dtype=np.float64).reshape(-1) for x, _ in data])
    index = {label: k for k, label in enumerate(labels)}
    targets = np.zeros((len(data), len(labels)))
    for row, (_, y) in enumerate(data):
        if y not in index:
            raise UnknownLabelError(f"training label {y!r} not in label set {list(labels)}")
        targets[row, index[y]] = 1.0
    return _augment(X, X.shape[1]), targets


def train(data: Sequence[Example], config: TrainConfig,
          labels: Optional[Sequence[str]] = None) -> MaxEntModel:
    """
    Full-batch gradient ascent from w = 0.

    Each epoch applies w <- w + lr * (sum of per-example gradients - l2 * w).
    No shuffling is involved, so training is deterministic.

    Args:
        data: (feature vector, label) pairs
        config: Learning rate, epochs, l2
        labels: Label set Y in tie-break order; defaults to first-appearance order in data

    Returns:
        Trained MaxEntModel
    """
    config.validate()
    if len(data) == 0:
        raise DataError("training data is empty")
    if labels is None:
        labels = list(dict.fromkeys(y for _, y in data))
        if len(labels) < 2:
            raise DataError(f"training data holds a single label {labels}; pass the full label set")
    labels = tuple(labels)

    Xa, targets = _design(data, labels)
    W = np.zeros((len(labels), Xa.shape[1]))
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.epochs):
            scores = Xa @ W.T
            probs = np.exp(scores - logsumexp(scores, axis=1, keepdims=True))
            grad = (targets - probs).T @ Xa
            W = W + config.learning_rate * (grad - config.l2 * W)
            if not np.all(np.isfinite(W)):
                raise NumericError(
                    f"weights diverged at epoch {epoch + 1}; lower --learning-rate or rescale the inputs"
                )

    model = MaxEntModel(labels, W.reshape(-1), ConjunctionFeatureMap(Xa.shape[1] - 1, len(labels)))
    logger.info(
        f"Trained maxent classifier: {len(data)} examples, labels {list(labels)}, "
        f"{config.epochs} epochs, lr={config.learning_rate}, l2={config.l2}"
    )
    return model


def predict(model: MaxEntModel, x: Any) -> str:
    """Most probable label; ties go to the earlier label in ``model.labels``."""
    return model.labels[int(np.argmax(label_probs(model, x)))]


def objective(model: MaxEntModel, data: Sequence[Example], l2: float = 0.0) -> float:
    """Regularised log-likelihood: sum log p(y | x) - (l2 / 2) ||w||^2."""
    total = sum(log_prob(model, x, y) for x, y in data)
    return float(total - 0.5 * l2 * float(model.w @ model.w))


def accuracy(model: MaxEntModel, data: Sequence[Example]) -> float:
    """Fraction of examples predicted correctly."""
    if len(data) == 0:
        raise DataError("cannot score an empty data set")
    return sum(predict(model, x) == y for x, y in data) / len(data)


def save_maxent_model(model: MaxEntModel, path: Union[str, Path],
                      input_mean: Optional[np.ndarray] = None,
                      input_scale: Optional[np.ndarray] = None) -> None:
    document = {
        "schema_version": SCHEMA_VERSION,
        "kind": "maxent",
        "labels": list(model.labels),
        "w": [float(v) for v in model.w],
        "feature_map": model.feature_map.to_dict(),
    }
    if input_mean is not None:
        document["input_mean"] = [float(v) for v in input_mean]
    if input_scale is not None:
        document["input_scale"] = [float(v) for v in input_scale]
    DataManager.save_json(document, path)


def load_maxent_model(path: Union[str, Path]) -> Tuple[MaxEntModel, Optional[np.ndarray], Optional[np.ndarray]]:
    """
    Load a classifier file.

    Returns:
        (model, input_mean or None, input_scale or None)
    """
    document = DataManager.load_json(path)
    DataManager.validate(document, MAXENT_MODEL_SCHEMA, "maxent model")
    fmap = ConjunctionFeatureMap(document["feature_map"]["dims"], document["feature_map"]["n_labels"])
    if fmap.n_labels != len(document["labels"]):
        raise DimensionMismatchError("feature map label count does not match labels")
    model = MaxEntModel(tuple(document["labels"]), np.array(document["w"]), fmap)

    def _optional(key: str) -> Optional[np.ndarray]:
        return np.array(document[key]) if key in document else None

    return model, _optional("input_mean"), _optional("input_scale")


def example_list(features: np.ndarray, labels: Sequence[str]) -> List[Example]:
    if len(features) != len(labels):
        raise DimensionMismatchError(f"{len(features)} feature rows but {len(labels)} labels")
    return [(row, label) for row, label in zip(features, labels)]
