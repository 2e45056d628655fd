"""
Extreme learning machine: one random sigmoid hidden layer whose output
weights are solved by ridge-regularized least squares against one-hot
targets. Hidden weights and biases are never trained.
"""
from typing import Any, Dict

import numpy as np
from scipy import linalg
from scipy.special import expit

from src.common.seeding import make_rng
from src.learners.base import LearnerKind, TrainedModel, normalize_rows, one_hot

SCHEMA = {
    "hidden": {"type": int, "default": 100, "min": 1, "help": "hidden nodes"},
    "ridge": {"type": float, "default": 1e-6, "min": 0.0,
              "help": "ridge term; 0 uses a minimum-norm least-squares solve"},
}


class ELMModel(TrainedModel):
    """Scores are the linear outputs clamped to [0, 1] and renormalized."""

    kind = "elm"
    probabilistic = True

    def __init__(self, n_classes, n_features, hyperparameters, W_in, b_in, beta):
        super().__init__(n_classes, n_features, hyperparameters)
        self.W_in = np.array(W_in, dtype=np.float64)
        self.b_in = np.array(b_in, dtype=np.float64)
        self.beta = np.array(beta, dtype=np.float64)

    def hidden_activations(self, X: np.ndarray) -> np.ndarray:
        return expit(X @ self.W_in + self.b_in)

    def raw_outputs(self, X: np.ndarray) -> np.ndarray:
        return self.hidden_activations(X) @ self.beta

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return normalize_rows(self.raw_outputs(X))

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"W_in": self.W_in, "b_in": self.b_in, "beta": self.beta}

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params):
        return cls(n_classes, n_features, hyperparameters, params["W_in"], params["b_in"], params["beta"])


def solve_output_weights(H: np.ndarray, T: np.ndarray, ridge: float) -> np.ndarray:
    """beta = argmin ||H beta - T||^2 + ridge ||beta||^2."""
    if ridge > 0.0:
        gram = H.T @ H + ridge * np.eye(H.shape[1])
        return linalg.solve(gram, H.T @ T, assume_a="pos")
    beta, *_ = linalg.lstsq(H, T)
    return beta


def train_elm(hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int) -> ELMModel:
    rng = make_rng(seed, "elm")
    d = X.shape[1]
    W_in = rng.uniform(-1.0, 1.0, size=(d, hp["hidden"]))
    b_in = rng.uniform(-1.0, 1.0, size=hp["hidden"])
    H = expit(X @ W_in + b_in)
    beta = solve_output_weights(H, one_hot(y, n_classes), hp["ridge"])
    return ELMModel(n_classes, d, hp, W_in, b_in, beta)


KIND = LearnerKind(
    kind="elm",
    summary="extreme learning machine, random sigmoid hidden layer, ridge least-squares output",
    schema=SCHEMA,
    train=train_elm,
    model_cls=ELMModel,
)
