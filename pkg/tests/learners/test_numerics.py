"""
Numerical checks of the individual learners.
"""
import numpy as np
import pytest

from src.data.dataset import Dataset
from src.learners.base import LearnerSpec, one_hot
from src.learners.elm import solve_output_weights
from src.learners.linear_svm import minmax_rows
from src.learners.logreg import logreg_loss_and_gradient
from src.learners.registry import fit
from src.learners.tree import grow_tree
from tests.learners.conftest import make_blobs


class TestLogisticRegression:
    """Test suite for the softmax regression learner."""

    def test_gradient_matches_finite_differences(self):
        """Test the analytic gradient at 20 random parameter points."""
        ds = make_blobs(n_per_class=10, n_classes=3, d=4, seed=2)
        Y = one_hot(ds.labels, ds.n_classes)
        rng = np.random.default_rng(0)
        eps = 1e-6
        for _ in range(20):
            W = rng.normal(size=(ds.n_features + 1, ds.n_classes))
            _, grad = logreg_loss_and_gradient(W, ds.features, Y, 0.1)
            numeric = np.zeros_like(W)
            for idx in np.ndindex(W.shape):
                step = np.zeros_like(W)
                step[idx] = eps
                plus, _ = logreg_loss_and_gradient(W + step, ds.features, Y, 0.1)
                minus, _ = logreg_loss_and_gradient(W - step, ds.features, Y, 0.1)
                numeric[idx] = (plus - minus) / (2 * eps)
            rel = np.linalg.norm(numeric - grad) / max(np.linalg.norm(numeric + grad), 1e-12)
            assert rel <= 1e-4

    def test_bias_row_is_not_penalized(self):
        """Test the L2 term skips the last (bias) row."""
        X = np.zeros((2, 1))
        Y = np.array([[1.0, 0.0], [0.0, 1.0]])
        W = np.array([[0.0, 0.0], [3.0, 3.0]])
        loss, grad = logreg_loss_and_gradient(W, X, Y, lam=10.0)
        assert loss == pytest.approx(np.log(2.0))
        np.testing.assert_allclose(grad[-1], 0.0, atol=1e-12)

    def test_separated_toy_set_is_confident_far_inside(self):
        """Test points deep inside each half of a separated 2-class set score above 0.9."""
        features = np.array([[-3.0, 0.5], [-2.0, -0.5], [-1.0, 0.0], [1.0, 0.5], [2.0, -0.5], [3.0, 0.0]])
        ds = Dataset(features, [0, 0, 0, 1, 1, 1], ("neg", "pos"), ("x", "y"))
        model = fit(LearnerSpec("logreg", {}), ds)
        for point, label in (([-5.0, 0.0], 0), ([5.0, 0.0], 1)):
            scores = model.predict_scores(np.array(point))
            assert int(np.argmax(scores)) == label
            assert scores.max() > 0.9

    def test_training_lowers_loss(self):
        """Test gradient descent improves on the zero initialization."""
        ds = make_blobs(seed=4)
        Y = one_hot(ds.labels, ds.n_classes)
        model = fit(LearnerSpec("logreg", {"max_iter": 200}), ds)
        start, _ = logreg_loss_and_gradient(np.zeros_like(model.W), ds.features, Y, 1e-4)
        end, _ = logreg_loss_and_gradient(model.W, ds.features, Y, 1e-4)
        assert end < start


class TestExtremeLearningMachine:
    """Test suite for the ELM learner."""

    def test_residual_orthogonal_to_hidden_layer(self):
        """Test H^T (H beta - T) vanishes for the unregularized solve."""
        ds = make_blobs(n_per_class=30, seed=5)
        model = fit(LearnerSpec("elm", {"hidden": 25, "ridge": 0.0}, seed=1), ds)
        H = model.hidden_activations(ds.features)
        residual = H @ model.beta - one_hot(ds.labels, ds.n_classes)
        assert np.max(np.abs(H.T @ residual)) <= 1e-6

    def test_ridge_solution_satisfies_normal_equations(self):
        """Test (H^T H + r I) beta = H^T T."""
        rng = np.random.default_rng(3)
        H = rng.uniform(size=(40, 10))
        T = one_hot(rng.integers(0, 3, size=40), 3)
        beta = solve_output_weights(H, T, ridge=0.5)
        np.testing.assert_allclose((H.T @ H + 0.5 * np.eye(10)) @ beta, H.T @ T, atol=1e-10)

    def test_hidden_layer_depends_on_seed(self):
        """Test different seeds draw different random hidden layers."""
        ds = make_blobs()
        a = fit(LearnerSpec("elm", {"hidden": 5}, seed=1), ds)
        b = fit(LearnerSpec("elm", {"hidden": 5}, seed=2), ds)
        assert not np.array_equal(a.W_in, b.W_in)
        assert np.all(np.abs(a.W_in) <= 1.0)


class TestTreesAndForests:
    """Test suite for CART and the random forest."""

    def test_degenerate_forest_equals_single_tree(self):
        """Test one unbagged all-feature tree predicts exactly like CART."""
        for seed in range(5):
            ds = make_blobs(n_per_class=25, n_classes=3, d=5, seed=seed, spread=1.0)
            forest = fit(LearnerSpec("random_forest", {
                "n_trees": 1, "bootstrap": False, "max_features": "all", "max_depth": None,
            }, seed=seed), ds)
            tree = fit(LearnerSpec("cart", {"max_depth": None}, seed=seed), ds)
            rng = np.random.default_rng(seed)
            probe = np.vstack([ds.features, rng.normal(scale=2.0, size=(200, ds.n_features))])
            np.testing.assert_array_equal(forest.predict_batch(probe), tree.predict_batch(probe))

    def test_unlimited_tree_fits_training_data(self):
        """Test a full-depth tree separates distinct points."""
        ds = make_blobs(n_per_class=20, spread=0.5, seed=8)
        tree = fit(LearnerSpec("cart"), ds)
        assert np.all(tree.predict_batch(ds.features) == ds.labels)

    def test_max_depth_one_is_a_stump(self):
        """Test depth limits bound the number of nodes."""
        ds = make_blobs(seed=9)
        tree = grow_tree(ds.features, ds.labels, ds.n_classes, max_depth=1)
        assert tree.n_nodes <= 3

    def test_split_goes_left_on_threshold(self):
        """Test rows equal to the threshold follow the left branch."""
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        tree = grow_tree(X, y, 2)
        assert tree.threshold[0] == 1.5
        np.testing.assert_array_equal(tree.predict(np.array([[1.5], [1.6]])), [0, 1])

    def test_forest_scores_are_vote_fractions(self):
        """Test scores are multiples of 1 / n_trees summing to one."""
        ds = make_blobs(seed=10)
        forest = fit(LearnerSpec("random_forest", {"n_trees": 7}, seed=3), ds)
        scores = forest.predict_scores_batch(ds.features)
        np.testing.assert_allclose(scores.sum(axis=1), 1.0)
        np.testing.assert_allclose(scores * 7, np.round(scores * 7), atol=1e-12)

    def test_trees_use_independent_streams(self):
        """Test adding trees keeps the earlier trees unchanged."""
        ds = make_blobs(seed=11)
        small = fit(LearnerSpec("random_forest", {"n_trees": 3}, seed=4), ds)
        large = fit(LearnerSpec("random_forest", {"n_trees": 6}, seed=4), ds)
        for a, b in zip(small.trees, large.trees[:3]):
            np.testing.assert_array_equal(a.feature, b.feature)
            np.testing.assert_array_equal(a.threshold, b.threshold)


class TestNearestNeighbours:
    """Test suite for k-NN."""

    def test_k1_training_accuracy_is_perfect(self):
        """Test each distinct training point is its own nearest neighbour."""
        for seed in range(5):
            ds = make_blobs(n_per_class=30, spread=0.3, seed=seed)
            model = fit(LearnerSpec("knn", {"k": 1}), ds)
            assert np.mean(model.predict_batch(ds.features) == ds.labels) == 1.0

    def test_distance_ties_prefer_lower_training_index(self):
        """Test equidistant neighbours are taken in training order."""
        ds = Dataset(np.array([[1.0], [-1.0], [5.0]]), [1, 0, 0], ("a", "b"), ("x",))
        model = fit(LearnerSpec("knn", {"k": 1}), ds)
        assert model.predict(np.array([0.0])) == 1

    def test_scores_are_vote_fractions(self):
        """Test k=4 scores are quarters."""
        ds = make_blobs(seed=12)
        model = fit(LearnerSpec("knn", {"k": 4}), ds)
        scores = model.predict_scores_batch(ds.features)
        np.testing.assert_allclose(scores * 4, np.round(scores * 4), atol=1e-12)


    def test_three_of_five_neighbours(self):
        """Test k=5 with three class-0 neighbours scores exactly [0.6, 0.4]."""
        features = np.array([[0.1], [0.2], [0.3], [-0.4], [-0.5], [10.0], [11.0]])
        ds = Dataset(features, [0, 0, 0, 1, 1, 1, 1], ("a", "b"), ("x",))
        model = fit(LearnerSpec("knn", {"k": 5}), ds)
        np.testing.assert_array_equal(model.predict_scores(np.array([0.0])), [0.6, 0.4])


class TestLinearSVM:
    """Test suite for the one-vs-rest linear SVM."""

    def test_minmax_rows(self):
        """Test per-row rescaling and the constant-row fallback."""
        out = minmax_rows(np.array([[-1.0, 1.0, 0.0], [2.0, 2.0, 2.0]]))
        np.testing.assert_allclose(out, [[0.0, 1.0, 0.5], [1 / 3, 1 / 3, 1 / 3]])

    def test_margins_rank_true_class_first(self):
        """Test most training rows get their largest margin on their own class."""
        ds = make_blobs(seed=13)
        model = fit(LearnerSpec("linear_svm", {"epochs": 300}), ds)
        assert np.mean(np.argmax(model.margins(ds.features), axis=1) == ds.labels) >= 0.9
