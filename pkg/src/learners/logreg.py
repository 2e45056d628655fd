"""
Multinomial logistic regression trained by full-batch gradient descent.

Parameters are a (d + 1) x m matrix whose last row is the bias; the L2
penalty applies to the weight rows only.
"""
from typing import Any, Dict, Mapping, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from src.learners.base import LearnerKind, TrainedModel, one_hot

SCHEMA = {
    "l2": {"type": float, "default": 1e-4, "min": 0.0, "help": "L2 penalty lambda"},
    "step": {"type": float, "default": 0.1, "exclusive_min": 0.0, "help": "gradient step size"},
    "max_iter": {"type": int, "default": 2000, "min": 1, "help": "maximum iterations"},
    "tol": {"type": float, "default": 1e-6, "min": 0.0, "help": "stop when the gradient norm drops below this"},
}


def _with_bias(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def logreg_loss_and_gradient(
    W: np.ndarray, X: np.ndarray, Y: np.ndarray, lam: float
) -> Tuple[float, np.ndarray]:
    """
    Mean cross-entropy plus (lam / 2) * ||weights||^2 and its gradient.

    Args:
        W: (d + 1) x m parameters, last row bias
        X: n x d features
        Y: n x m one-hot targets
        lam: L2 penalty
    """
    Xb = _with_bias(X)
    logits = Xb @ W
    n = X.shape[0]
    log_norm = logsumexp(logits, axis=1)
    loss = float(np.sum(log_norm - np.sum(Y * logits, axis=1)) / n)
    penalty_mask = np.ones_like(W)
    penalty_mask[-1, :] = 0.0
    loss += 0.5 * lam * float(np.sum((W * penalty_mask) ** 2))

    probs = softmax(logits, axis=1)
    grad = Xb.T @ (probs - Y) / n + lam * W * penalty_mask
    return loss, grad


class LogisticRegressionModel(TrainedModel):
    """Scores are softmax class probabilities."""

    kind = "logreg"
    probabilistic = True

    def __init__(self, n_classes, n_features, hyperparameters, W: np.ndarray, n_iter: int = 0):
        super().__init__(n_classes, n_features, hyperparameters)
        self.W = np.array(W, dtype=np.float64)
        self.n_iter = int(n_iter)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return softmax(_with_bias(X) @ self.W, axis=1)

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"W": self.W}

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params: Mapping[str, np.ndarray]):
        return cls(n_classes, n_features, hyperparameters, params["W"])


def train_logreg(
    hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int
) -> LogisticRegressionModel:
    Y = one_hot(y, n_classes)
    W = np.zeros((X.shape[1] + 1, n_classes))
    n_iter = 0
    for n_iter in range(1, hp["max_iter"] + 1):
        _, grad = logreg_loss_and_gradient(W, X, Y, hp["l2"])
        if np.linalg.norm(grad) < hp["tol"]:
            break
        W -= hp["step"] * grad
    return LogisticRegressionModel(n_classes, X.shape[1], hp, W, n_iter)


KIND = LearnerKind(
    kind="logreg",
    summary="multinomial softmax regression, L2 penalty, full-batch gradient descent",
    schema=SCHEMA,
    train=train_logreg,
    model_cls=LogisticRegressionModel,
)
