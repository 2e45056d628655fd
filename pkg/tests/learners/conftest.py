import numpy as np
import pytest

from src.data.dataset import Dataset, fit_scaler

# Small settings keep the iterative learners fast in tests.
FAST_HYPERPARAMETERS = {
    "knn": {"k": 3},
    "logreg": {"max_iter": 300},
    "random_forest": {"n_trees": 8},
    "elm": {"hidden": 20},
    "mlp_bp": {"hidden": 8, "epochs": 500},
    "linear_svm": {"epochs": 200},
    "cart": {},
}


def make_blobs(n_per_class=20, n_classes=3, d=4, seed=0, spread=3.0) -> Dataset:
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=spread, size=(n_classes, d))
    labels = np.repeat(np.arange(n_classes), n_per_class)
    features = centers[labels] + rng.normal(size=(labels.size, d))
    raw = Dataset(
        features=features,
        labels=labels,
        class_names=tuple(f"c{i}" for i in range(n_classes)),
        feature_names=tuple(f"f{i}" for i in range(d)),
        name="blobs",
    )
    return fit_scaler(raw).transform(raw)


@pytest.fixture
def blobs() -> Dataset:
    """Three well separated Gaussian classes in four dimensions."""
    return make_blobs()
