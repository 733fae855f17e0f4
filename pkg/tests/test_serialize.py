import numpy as np

from tabmlkit.classify import (
    ForestParams,
    TreeParams,
    forest_fit,
    forest_score,
    knn_fit,
    knn_score,
    load_model,
    logreg_fit,
    logreg_predict_proba,
    save_model,
    svm_fit,
    svm_score,
    tree_fit,
    tree_score,
)
from tabmlkit.rng import Stream


def problem(seed, n=40):
    stream = Stream(seed)
    x = stream.normal(n * 3, 0, 1).reshape(n, 3)
    y = (x[:, 0] > 0).astype(int)
    if len(np.unique(y)) < 2:
        y[0] = 1 - y[0]
    return x, y


def roundtrip(model, path):
    save_model(model, path)
    return load_model(path)


def test_logreg_roundtrip(tmp_path):
    x, y = problem(1)
    m = logreg_fit(x, y, penalty="l1", c=0.5)
    m2 = roundtrip(m, tmp_path / "m.json")
    assert np.array_equal(logreg_predict_proba(m, x), logreg_predict_proba(m2, x))
    assert m2.penalty == "l1" and m2.c == 0.5


def test_tree_roundtrip(tmp_path):
    x, y = problem(2)
    m = tree_fit(x, y, TreeParams(max_depth=4, class_weight="balanced"))
    m2 = roundtrip(m, tmp_path / "m.json")
    assert np.array_equal(tree_score(m, x), tree_score(m2, x))
    assert m2.params == m.params


def test_forest_roundtrip(tmp_path):
    x, y = problem(3)
    m = forest_fit(x, y, ForestParams(n_estimators=5, max_depth=3, seed=21))
    m2 = roundtrip(m, tmp_path / "m.json")
    assert np.array_equal(forest_score(m, x), forest_score(m2, x))


def test_knn_roundtrip(tmp_path):
    x, y = problem(4)
    m = knn_fit(x, y, k=3, weighting="distance", metric="manhattan")
    m2 = roundtrip(m, tmp_path / "m.json")
    assert np.array_equal(knn_score(m, x), knn_score(m2, x))


def test_svm_roundtrip(tmp_path):
    x, y = problem(5)
    m = svm_fit(x, y, c=1.0, gamma="scale")
    m2 = roundtrip(m, tmp_path / "m.json")
    assert np.allclose(svm_score(m, x), svm_score(m2, x), atol=1e-12)
    assert m2.gamma_rule == "scale"
