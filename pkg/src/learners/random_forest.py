"""
Random forest: bootstrap-resampled CART trees with a random feature subset
at every split, combined by majority vote.
"""
import math
from typing import Any, Dict, List

import numpy as np

from src.common.seeding import make_rng
from src.learners.base import LearnerKind, TrainedModel
from src.learners.tree import TreeArrays, grow_tree

SCHEMA = {
    "n_trees": {"type": int, "default": 100, "min": 1, "help": "number of trees"},
    "max_depth": {"type": int, "default": None, "nullable": True, "min": 1,
                  "help": "maximum tree depth, null for unlimited"},
    "min_samples_split": {"type": int, "default": 2, "min": 2,
                          "help": "minimum rows needed to split a node"},
    "bootstrap": {"type": bool, "default": True, "help": "resample rows with replacement per tree"},
    "max_features": {"type": str, "default": "sqrt", "choices": ["sqrt", "all"],
                     "help": "features examined per split: ceil(sqrt(d)) or all"},
}


class RandomForestModel(TrainedModel):
    """Scores are the fraction of trees voting for each class."""

    kind = "random_forest"
    probabilistic = True

    def __init__(self, n_classes, n_features, hyperparameters, trees: List[TreeArrays]):
        super().__init__(n_classes, n_features, hyperparameters)
        self.trees = list(trees)

    def _scores(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.float64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, tree.predict(X)] += 1.0
        return votes / len(self.trees)

    def get_params(self) -> Dict[str, np.ndarray]:
        params: Dict[str, np.ndarray] = {}
        for i, tree in enumerate(self.trees):
            params.update(tree.to_params(prefix=f"tree{i}."))
        return params

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params):
        n_trees = len([k for k in params if k.endswith(".feature")])
        trees = [TreeArrays.from_params(params, prefix=f"tree{i}.") for i in range(n_trees)]
        return cls(n_classes, n_features, hyperparameters, trees)


def train_random_forest(
    hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int
) -> RandomForestModel:
    n, d = X.shape
    max_features = None if hp["max_features"] == "all" else int(math.ceil(math.sqrt(d)))
    trees = []
    for i in range(hp["n_trees"]):
        # one stream per tree keeps trees independent of build order
        rng = make_rng(seed, "random_forest", "tree", i)
        if hp["bootstrap"]:
            rows = rng.integers(0, n, size=n)
            X_tree, y_tree = X[rows], y[rows]
        else:
            X_tree, y_tree = X, y
        trees.append(
            grow_tree(X_tree, y_tree, n_classes, hp["max_depth"], hp["min_samples_split"], max_features, rng)
        )
    return RandomForestModel(n_classes, d, hp, trees)


KIND = LearnerKind(
    kind="random_forest",
    summary="bagged CART trees, ceil(sqrt(d)) random features per split, majority vote",
    schema=SCHEMA,
    train=train_random_forest,
    model_cls=RandomForestModel,
)
