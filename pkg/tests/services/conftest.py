import numpy as np
import pytest
import yaml

from src.learners.base import LearnerSpec

FAST_LEARNERS = [
    LearnerSpec("knn", {"k": 3}),
    LearnerSpec("logreg", {"max_iter": 150}),
    LearnerSpec("elm", {"hidden": 12}),
]


def write_toy_dataset(directory, name="toy", n_per_class=30, seed=0):
    """Three Gaussian classes written as a headerless CSV plus its manifest."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=2.0, size=(3, 4))
    lines = []
    for i in range(3 * n_per_class):
        c = i % 3
        row = centers[c] + rng.normal(size=4)
        lines.append(",".join(f"{v:.6f}" for v in row) + f",class_{c}")
    data_path = directory / f"{name}.csv"
    data_path.write_text("\n".join(lines) + "\n")
    manifest_path = directory / f"{name}.yaml"
    manifest_path.write_text(yaml.safe_dump({"name": name, "path": str(data_path)}))
    return manifest_path


@pytest.fixture
def manifest_dir(tmp_path):
    """Directory with two small synthetic datasets, 'toy' and 'toy2'."""
    directory = tmp_path / "datasets"
    directory.mkdir()
    write_toy_dataset(directory, "toy", seed=0)
    write_toy_dataset(directory, "toy2", seed=1)
    return directory
