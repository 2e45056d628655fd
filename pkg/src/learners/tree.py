"""
CART classification trees with Gini impurity.

Trees are stored as flat parallel arrays; node 0 is the root and a node is
a leaf when its feature index is -1. Rows with x[feature] <= threshold go
left.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.learners.base import LearnerKind, TrainedModel, one_hot

SCHEMA = {
    "max_depth": {"type": int, "default": None, "nullable": True, "min": 1,
                  "help": "maximum depth, null for unlimited"},
    "min_samples_split": {"type": int, "default": 2, "min": 2,
                          "help": "minimum rows needed to split a node"},
}


@dataclass(frozen=True, eq=False)
class TreeArrays:
    """Flat tree representation."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            current = node[rows]
            go_left = X[rows, self.feature[current]] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_params(self, prefix: str = "") -> Dict[str, np.ndarray]:
        return {
            f"{prefix}feature": self.feature,
            f"{prefix}threshold": self.threshold,
            f"{prefix}left": self.left,
            f"{prefix}right": self.right,
            f"{prefix}value": self.value,
        }

    @classmethod
    def from_params(cls, params: Mapping[str, np.ndarray], prefix: str = "") -> "TreeArrays":
        return cls(
            feature=np.asarray(params[f"{prefix}feature"], dtype=np.int64),
            threshold=np.asarray(params[f"{prefix}threshold"], dtype=np.float64),
            left=np.asarray(params[f"{prefix}left"], dtype=np.int64),
            right=np.asarray(params[f"{prefix}right"], dtype=np.int64),
            value=np.asarray(params[f"{prefix}value"], dtype=np.int64),
        )


def _best_split(
    X: np.ndarray, y: np.ndarray, n_classes: int, features: np.ndarray
) -> Optional[Tuple[int, float]]:
    """
    Feature and threshold minimising the summed child impurity n_l*G_l + n_r*G_r.

    Only cuts between distinct consecutive values are considered; the first
    best candidate in feature order wins.
    """
    n = y.shape[0]
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    total = np.bincount(y, minlength=n_classes).astype(np.float64)
    indicators = one_hot(y, n_classes)

    best_cost = np.inf
    best: Optional[Tuple[int, float]] = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        left_counts = np.cumsum(indicators[order], axis=0)[:-1]
        right_counts = total - left_counts
        # n * gini = n - sum(c^2) / n
        cost = (n_left - np.sum(left_counts ** 2, axis=1) / n_left
                + n_right - np.sum(right_counts ** 2, axis=1) / n_right)
        cost[~valid] = np.inf
        pos = int(np.argmin(cost))
        if cost[pos] < best_cost:
            best_cost = cost[pos]
            threshold = 0.5 * (xs[pos] + xs[pos + 1])
            if threshold >= xs[pos + 1]:
                threshold = xs[pos]
            best = (int(f), float(threshold))
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: Optional[int] = None,
    min_samples_split: int = 2,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> TreeArrays:
    """
    Grow one CART tree.

    Args:
        max_features: Size of the random feature subset drawn at every node;
            None examines all features in index order without touching `rng`
        rng: Generator for feature subsets, required when max_features is set
    """
    d = X.shape[1]
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[int] = []

    def new_node(rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        # argmax: ties go to the smallest class index
        value.append(int(np.argmax(np.bincount(y[rows], minlength=n_classes))))
        return len(feature) - 1

    root_rows = np.arange(X.shape[0])
    stack = [(new_node(root_rows), root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        labels = y[rows]
        if (
            rows.size < min_samples_split
            or (max_depth is not None and depth >= max_depth)
            or np.all(labels == labels[0])
        ):
            continue

        if max_features is None or max_features >= d:
            candidates = np.arange(d)
        else:
            candidates = rng.choice(d, size=max_features, replace=False)

        split = _best_split(X[rows], labels, n_classes, candidates)
        if split is None:
            continue
        f, t = split
        go_left = X[rows, f] <= t
        left_rows, right_rows = rows[go_left], rows[~go_left]

        feature[node] = f
        threshold[node] = t
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return TreeArrays(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.int64),
    )


class DecisionTreeModel(TrainedModel):
    """A single CART tree; scores are the one-hot vote of the reached leaf."""

    kind = "cart"
    probabilistic = True

    def __init__(self, n_classes, n_features, hyperparameters, tree: TreeArrays):
        super().__init__(n_classes, n_features, hyperparameters)
        self.tree = tree

    def _scores(self, X: np.ndarray) -> np.ndarray:
        return one_hot(self.tree.predict(X), self.n_classes)

    def get_params(self) -> Dict[str, np.ndarray]:
        return self.tree.to_params()

    @classmethod
    def from_params(cls, n_classes, n_features, hyperparameters, params):
        return cls(n_classes, n_features, hyperparameters, TreeArrays.from_params(params))


def train_cart(hp: Dict[str, Any], X: np.ndarray, y: np.ndarray, n_classes: int, seed: int) -> DecisionTreeModel:
    tree = grow_tree(X, y, n_classes, hp["max_depth"], hp["min_samples_split"])
    return DecisionTreeModel(n_classes, X.shape[1], hp, tree)


KIND = LearnerKind(
    kind="cart",
    summary="single CART tree with Gini impurity",
    schema=SCHEMA,
    train=train_cart,
    model_cls=DecisionTreeModel,
)
