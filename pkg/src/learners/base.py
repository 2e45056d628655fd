"""
Base-learner abstraction.

A learner kind bundles a hyperparameter schema, a training function and
the model class it produces. Trained models expose per-class scores in
[0, 1]; predictions are the argmax of those scores with ties broken by the
smallest class index.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Type

import numpy as np

from src.common.error_categorization import LearnerError


@dataclass(frozen=True)
class LearnerSpec:
    """
    What to train: learner kind, hyperparameters and seed.

    `name` is the display label used in reports; it defaults to the kind.
    """
    kind: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0
    name: Optional[str] = None

    @property
    def label(self) -> str:
        return self.name or self.kind


class TrainedModel(ABC):
    """
    A fitted decision maker.

    Subclasses implement `_scores` on a validated batch and the parameter
    round-trip used by committee serialization.
    """

    kind: str = ""
    probabilistic: bool = False

    def __init__(self, n_classes: int, n_features: int, hyperparameters: Mapping[str, Any]):
        self.n_classes = int(n_classes)
        self.n_features = int(n_features)
        self.hyperparameters = dict(hyperparameters)

    @abstractmethod
    def _scores(self, X: np.ndarray) -> np.ndarray:
        """Scores for a finite n x d batch, shape n x m."""

    @abstractmethod
    def get_params(self) -> Dict[str, np.ndarray]:
        """Learned parameters as named numpy arrays."""

    @classmethod
    @abstractmethod
    def from_params(
        cls,
        n_classes: int,
        n_features: int,
        hyperparameters: Mapping[str, Any],
        params: Mapping[str, np.ndarray],
    ) -> "TrainedModel":
        """Rebuild a model from `get_params` output."""

    def _check_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise LearnerError(
                f"dimension mismatch: model expects {self.n_features} features, got shape {X.shape}",
                kind=self.kind,
            )
        if not np.all(np.isfinite(X)):
            raise LearnerError("instance contains non-finite values", kind=self.kind)
        return X

    def predict_scores_batch(self, X: np.ndarray) -> np.ndarray:
        """Per-class scores for every row of X."""
        return self._scores(self._check_batch(X))

    def predict_scores(self, instance: np.ndarray) -> np.ndarray:
        """Per-class scores in [0, 1] for one d-vector."""
        x = np.asarray(instance, dtype=np.float64)
        if x.ndim != 1:
            raise LearnerError(f"instance must be a vector, got shape {x.shape}", kind=self.kind)
        return self.predict_scores_batch(x[None, :])[0]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        # np.argmax returns the first maximum: smallest class index wins ties
        return np.argmax(self.predict_scores_batch(X), axis=1)

    def predict(self, instance: np.ndarray) -> int:
        return int(np.argmax(self.predict_scores(instance)))


Trainer = Callable[[Dict[str, Any], np.ndarray, np.ndarray, int, int], TrainedModel]


@dataclass(frozen=True)
class LearnerKind:
    """Registration record for one learner kind."""
    kind: str
    summary: str
    schema: Dict[str, Dict[str, Any]]
    train: Trainer
    model_cls: Type[TrainedModel]


def _check_value(kind: str, key: str, value: Any, rule: Dict[str, Any]) -> Any:
    expected = rule["type"]
    if value is None:
        if rule.get("nullable", False):
            return None
        raise LearnerError(f"{kind}.{key} must not be null", kind=kind)
    if isinstance(value, bool) and expected is not bool:
        raise LearnerError(f"{kind}.{key} expects {expected.__name__}, got bool", kind=kind)
    if expected is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, expected):
        raise LearnerError(
            f"{kind}.{key} expects {expected.__name__}, got {type(value).__name__}", kind=kind
        )
    if "choices" in rule and value not in rule["choices"]:
        raise LearnerError(f"{kind}.{key} must be one of {rule['choices']}, got {value!r}", kind=kind)
    if "min" in rule and value < rule["min"]:
        raise LearnerError(f"{kind}.{key} must be >= {rule['min']}, got {value}", kind=kind)
    if "exclusive_min" in rule and value <= rule["exclusive_min"]:
        raise LearnerError(f"{kind}.{key} must be > {rule['exclusive_min']}, got {value}", kind=kind)
    return value


def validate_hyperparameters(learner: LearnerKind, hyperparameters: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Fill defaults and validate values against the kind's schema.

    Raises:
        LearnerError: unknown key, wrong type or out-of-range value
    """
    unknown = set(hyperparameters) - set(learner.schema)
    if unknown:
        raise LearnerError(
            f"unknown hyperparameter(s) for {learner.kind}: {', '.join(sorted(unknown))}",
            kind=learner.kind,
        )
    resolved: Dict[str, Any] = {}
    for key, rule in learner.schema.items():
        value = hyperparameters[key] if key in hyperparameters else rule["default"]
        resolved[key] = _check_value(learner.kind, key, value, rule)
    return resolved


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """n x m indicator matrix."""
    out = np.zeros((labels.shape[0], n_classes), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def normalize_rows(scores: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and rescale rows to sum 1; all-zero rows become uniform."""
    clipped = np.clip(scores, 0.0, 1.0)
    totals = clipped.sum(axis=1, keepdims=True)
    uniform = np.full_like(clipped, 1.0 / clipped.shape[1])
    safe = np.where(totals > 0.0, totals, 1.0)
    return np.where(totals > 0.0, clipped / safe, uniform)
