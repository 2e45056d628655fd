"""k-nearest-neighbour voting on (standardized) Euclidean distance."""
from typing import Any, Dict, Mapping

import numpy as np

from src.common.error_categorization import LearnerError
from src.learners.base import LearnerKind, TrainedModel

SCHEMA = {
    "k": {"type": int, "default": 5, "min": 1, "help": "number of neighbours"},
}


class KNNModel(TrainedModel):
    """Scores are the class vote fractions among the k nearest training rows."""

    kind = "knn"
    probabilistic = True

    def __init__(self, n_classes, n_features, hyperparameters, X: np.ndarray, y: np.ndarray):
        super().__init__(n_classes, n_features, hyperparameters)
        self.X = np.array(X, dtype=np.float64)
        self.y = np.array(y, dtype=np.int64)
        self.k = int(self.hyperparameters["k"])

    def _scores(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0], self.n_classes), dtype=np.float64)
        for row, x in enumerate(X):
            dist = np.sum((self.X - x) ** 2, axis=1)
            # stable sort: equal distances keep the lower training index first
            nearest = np.argsort(dist, kind="stable")[: self.k]
            out[row] = np.bincount(self.y[nearest], minlength=self.n_classes) / self.k
        return out

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"X": self.X, "y": self.y}

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params: Mapping[str, np.ndarray]):
        return cls(n_classes, n_features, hyperparameters, params["X"], params["y"])


def train_knn(hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int) -> KNNModel:
    if hp["k"] > X.shape[0]:
        raise LearnerError(f"k={hp['k']} exceeds the {X.shape[0]} training rows", kind="knn")
    return KNNModel(n_classes, X.shape[1], hp, X, y)


KIND = LearnerKind(
    kind="knn",
    summary="k-nearest neighbours, scores = neighbour vote fractions",
    schema=SCHEMA,
    train=train_knn,
    model_cls=KNNModel,
)
