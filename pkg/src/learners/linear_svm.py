"""
One-vs-rest linear SVMs trained jointly by hinge-loss subgradient descent.
"""
from typing import Any, Dict

import numpy as np

from src.learners.base import LearnerKind, TrainedModel

SCHEMA = {
    "l2": {"type": float, "default": 1e-3, "exclusive_min": 0.0, "help": "regularization lambda"},
    "learning_rate": {"type": float, "default": 0.1, "exclusive_min": 0.0,
                      "help": "initial step, decayed as 1/sqrt(t)"},
    "epochs": {"type": int, "default": 1000, "min": 1, "help": "full-batch subgradient steps"},
}


def minmax_rows(margins: np.ndarray) -> np.ndarray:
    """Rescale each row to [0, 1]; constant rows become uniform."""
    low = margins.min(axis=1, keepdims=True)
    span = margins.max(axis=1, keepdims=True) - low
    uniform = np.full_like(margins, 1.0 / margins.shape[1])
    return np.where(span > 0.0, (margins - low) / np.where(span > 0.0, span, 1.0), uniform)


class LinearSVMModel(TrainedModel):
    """Scores are the per-instance min-max rescaled class margins."""

    kind = "linear_svm"
    probabilistic = False

    def __init__(self, n_classes, n_features, hyperparameters, W, b):
        super().__init__(n_classes, n_features, hyperparameters)
        self.W = np.array(W, dtype=np.float64)
        self.b = np.array(b, dtype=np.float64)

    def margins(self, X: np.ndarray) -> np.ndarray:
        return X @ self.W + self.b

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return minmax_rows(self.margins(X))

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b}

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params):
        return cls(n_classes, n_features, hyperparameters, params["W"], params["b"])


def train_linear_svm(
    hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int
) -> LinearSVMModel:
    n, d = X.shape
    # +1 for the class, -1 for the rest, one column per class
    S = -np.ones((n, n_classes))
    S[np.arange(n), y] = 1.0
    W = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    lam = hp["l2"]

    for t in range(1, hp["epochs"] + 1):
        violated = (S * (X @ W + b)) < 1.0
        coef = np.where(violated, S, 0.0)
        grad_W = lam * W - X.T @ coef / n
        grad_b = -coef.sum(axis=0) / n
        step = hp["learning_rate"] / np.sqrt(t)
        W -= step * grad_W
        b -= step * grad_b

    return LinearSVMModel(n_classes, d, hp, W, b)


KIND = LearnerKind(
    kind="linear_svm",
    summary="one-vs-rest linear hinge-loss classifiers, min-max rescaled margins",
    schema=SCHEMA,
    train=train_linear_svm,
    model_cls=LinearSVMModel,
)
