"""Back-propagation network: one sigmoid hidden layer, softmax output."""
from typing import Any, Dict

import numpy as np
from scipy.special import expit, softmax

from src.common.seeding import make_rng
from src.learners.base import LearnerKind, TrainedModel, one_hot

SCHEMA = {
    "hidden": {"type": int, "default": 32, "min": 1, "help": "hidden nodes"},
    "learning_rate": {"type": float, "default": 0.5, "exclusive_min": 0.0, "help": "fixed learning rate"},
    "epochs": {"type": int, "default": 1000, "min": 1, "help": "full-batch epochs"},
    "l2": {"type": float, "default": 1e-4, "min": 0.0, "help": "L2 penalty on weights"},
}


class MLPModel(TrainedModel):
    """Scores are softmax class probabilities."""

    kind = "mlp_bp"
    probabilistic = True

    def __init__(self, n_classes, n_features, hyperparameters, W1, b1, W2, b2):
        super().__init__(n_classes, n_features, hyperparameters)
        self.W1 = np.array(W1, dtype=np.float64)
        self.b1 = np.array(b1, dtype=np.float64)
        self.W2 = np.array(W2, dtype=np.float64)
        self.b2 = np.array(b2, dtype=np.float64)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return softmax(expit(X @ self.W1 + self.b1) @ self.W2 + self.b2, axis=1)

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params):
        return cls(n_classes, n_features, hyperparameters,
                   params["W1"], params["b1"], params["W2"], params["b2"])


def train_mlp(hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int) -> MLPModel:
    rng = make_rng(seed, "mlp_bp")
    n, d = X.shape
    hidden = hp["hidden"]
    W1 = rng.uniform(-1.0, 1.0, size=(d, hidden)) / np.sqrt(d)
    b1 = np.zeros(hidden)
    W2 = rng.uniform(-1.0, 1.0, size=(hidden, n_classes)) / np.sqrt(hidden)
    b2 = np.zeros(n_classes)
    Y = one_hot(y, n_classes)
    lr, lam = hp["learning_rate"], hp["l2"]

    for _ in range(hp["epochs"]):
        A1 = expit(X @ W1 + b1)
        P = softmax(A1 @ W2 + b2, axis=1)
        delta2 = (P - Y) / n
        grad_W2 = A1.T @ delta2 + lam * W2
        grad_b2 = delta2.sum(axis=0)
        delta1 = (delta2 @ W2.T) * A1 * (1.0 - A1)
        grad_W1 = X.T @ delta1 + lam * W1
        grad_b1 = delta1.sum(axis=0)
        W2 -= lr * grad_W2
        b2 -= lr * grad_b2
        W1 -= lr * grad_W1
        b1 -= lr * grad_b1

    return MLPModel(n_classes, d, hp, W1, b1, W2, b2)


KIND = LearnerKind(
    kind="mlp_bp",
    summary="one-hidden-layer network trained by back-propagation",
    schema=SCHEMA,
    train=train_mlp,
    model_cls=MLPModel,
)
