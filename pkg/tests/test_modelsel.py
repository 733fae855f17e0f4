import numpy as np
import pytest

from tabmlkit.errors import ClassTooSmall, LengthMismatch, SingleClass
from tabmlkit.modelsel import (
    ConfusionMatrix,
    auc,
    binary_f1,
    confusion,
    default_grid,
    enumerate_grid,
    evaluate_predictions,
    grid_search,
    grid_size,
    metric_panel,
    stratified_kfold,
    tuning_curves,
)
from tabmlkit.rng import Stream


def make_problem(seed, n=40, p=3):
    stream = Stream(seed)
    x = stream.normal(n * p, 0, 1).reshape(n, p)
    y = ((x[:, 0] + 0.4 * stream.normal(n, 0, 1)) > 0).astype(int)
    if len(np.unique(y)) < 2:
        y[0] = 1 - y[0]
    return x, y


def test_kfold_balanced_tiny():
    y = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    folds = stratified_kfold(y, k=5, seed=1)
    for fold in folds:
        assert len(fold) == 2
        assert y[fold].sum() == 1


def test_kfold_partition():
    y = (Stream(2).uniform(47) < 0.4).astype(int)
    folds = stratified_kfold(y, k=5, seed=3)
    merged = np.concatenate(folds)
    assert len(merged) == 47
    assert len(np.unique(merged)) == 47


def test_kfold_deterministic():
    y = (Stream(4).uniform(30) < 0.5).astype(int)
    a = stratified_kfold(y, k=5, seed=9)
    b = stratified_kfold(y, k=5, seed=9)
    for fa, fb in zip(a, b):
        assert np.array_equal(fa, fb)


def test_kfold_class_too_small():
    y = np.array([0] * 10 + [1] * 3)
    with pytest.raises(ClassTooSmall):
        stratified_kfold(y, k=5, seed=0)


def test_grid_enumeration_lexicographic():
    grid = {"a": [1, 2], "b": ["x", "y", "z"]}
    combos = enumerate_grid(grid)
    assert combos[0] == {"a": 1, "b": "x"}
    assert combos[1] == {"a": 1, "b": "y"}
    assert combos[-1] == {"a": 2, "b": "z"}
    assert len(combos) == grid_size(grid) == 6


def test_published_grid_sizes():
    assert grid_size(default_grid("logreg")) == 10
    assert grid_size(default_grid("knn")) == 16
    assert grid_size(default_grid("forest")) == 384
    assert grid_size(default_grid("svm")) == 6
    tree_grid = default_grid("tree")
    expected = 1
    for values in tree_grid.values():
        expected *= len(values)
    assert grid_size(tree_grid) == expected == 103680


def test_grid_search_single_config_matches_manual_cv():
    x, y = make_problem(5)
    grid = {"penalty": ["l2"], "c": [1.0]}
    out = grid_search("logreg", grid, x, y, k=5, seed=11)
    assert len(out.cv.entries) == 1
    # manual cross-validation of the same configuration
    from tabmlkit.classify import logreg_fit, logreg_predict

    folds = stratified_kfold(y, k=5, seed=11)
    scores = []
    for fold in folds:
        train = np.setdiff1d(np.arange(len(y)), fold)
        m = logreg_fit(x[train], y[train], penalty="l2", c=1.0)
        scores.append(binary_f1(y[fold], logreg_predict(m, x[fold])))
    assert out.best_mean_score == pytest.approx(float(np.mean(scores)))


def test_grid_search_two_config_oracle():
    x, y = make_problem(6, n=36)
    grid = {"n_neighbors": [1, 5], "weights": ["uniform"], "metric": ["euclidean"]}
    out = grid_search("knn", grid, x, y, k=3, seed=2)
    from tabmlkit.classify import knn_fit, knn_predict

    folds = stratified_kfold(y, k=3, seed=2)
    means = []
    for k_val in (1, 5):
        scores = []
        for fold in folds:
            train = np.setdiff1d(np.arange(len(y)), fold)
            m = knn_fit(x[train], y[train], k=k_val)
            scores.append(binary_f1(y[fold], knn_predict(m, x[fold])))
        means.append(float(np.mean(scores)))
    assert out.best_params["n_neighbors"] == (1, 5)[int(np.argmax(means))]
    assert out.best_mean_score == pytest.approx(max(means))


def test_grid_search_failure_scores_minus_inf():
    x, y = make_problem(7, n=20)
    # k larger than any training fold forces a fit error in every fold
    grid = {"n_neighbors": [5, 1000], "weights": ["uniform"], "metric": ["euclidean"]}
    out = grid_search("knn", grid, x, y, k=4, seed=1)
    assert out.best_params["n_neighbors"] == 5
    failed = out.cv.entries[1]
    assert failed.failed
    assert failed.mean_score == -np.inf
    assert failed.diagnostics


def test_grid_search_exhaustive_count():
    x, y = make_problem(8)
    grid = {"penalty": ["l1", "l2"], "c": [0.001, 0.01, 0.1, 1, 10]}
    out = grid_search("logreg", grid, x, y, k=3, seed=4)
    assert len(out.cv.entries) == 10
    params_seen = [e.params for e in out.cv.entries]
    assert params_seen[0] == {"penalty": "l1", "c": 0.001}
    assert params_seen[-1] == {"penalty": "l2", "c": 10}


def test_confusion_perfect():
    cm = confusion([1, 1, 1, 0, 0], [1, 1, 1, 0, 0])
    assert (cm.tn, cm.fp, cm.fn, cm.tp) == (2, 0, 0, 3)


def test_confusion_length_mismatch():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])


def test_paper_confusion_accuracies():
    svm_cm = ConfusionMatrix(tn=36, fp=8, fn=3, tp=18)
    assert metric_panel(svm_cm).accuracy == pytest.approx(54 / 65)
    dt_cm = ConfusionMatrix(tn=23, fp=21, fn=4, tp=17)
    report = metric_panel(dt_cm)
    assert report.accuracy == pytest.approx(40 / 65)
    assert report.binary_f1 == pytest.approx(0.576, abs=5e-4)
    knn_cm = ConfusionMatrix(tn=30, fp=14, fn=4, tp=17)
    assert metric_panel(knn_cm).accuracy == pytest.approx(47 / 65)
    rf_cm = ConfusionMatrix(tn=34, fp=10, fn=2, tp=19)
    assert metric_panel(rf_cm).accuracy == pytest.approx(53 / 65)


def test_metric_panel_zero_denominator_conventions():
    cm = ConfusionMatrix(tn=5, fp=0, fn=5, tp=0)  # nothing predicted positive
    report = metric_panel(cm)
    assert report.binary_precision == 0.0
    assert report.binary_recall == 0.0
    assert report.binary_f1 == 0.0
    assert 0.0 <= report.accuracy <= 1.0


def test_weighted_equals_macro_on_equal_support():
    cm = ConfusionMatrix(tn=7, fp=3, fn=2, tp=8)  # supports 10 and 10
    report = metric_panel(cm)
    assert report.weighted_f1 == pytest.approx(report.macro_f1)


def test_accuracy_matches_agreement_vector():
    stream = Stream(10)
    y_true = (stream.uniform(50) < 0.5).astype(int)
    y_pred = (stream.uniform(50) < 0.5).astype(int)
    report = evaluate_predictions(y_true, y_pred)
    assert report.accuracy == pytest.approx(float((y_true == y_pred).mean()), abs=1e-12)


def test_auc_hand_enumerated():
    y = np.array([1, 1, 0])
    scores = np.array([0.9, 0.4, 0.5])
    assert auc(y, scores) == pytest.approx(0.5)


def test_auc_perfect_and_ties():
    y = np.array([0, 0, 1, 1])
    assert auc(y, np.array([0.1, 0.2, 0.8, 0.9])) == 1.0
    assert auc(y, np.zeros(4)) == 0.5


def test_auc_single_class():
    with pytest.raises(SingleClass):
        auc(np.ones(3), np.arange(3.0))


def test_auc_invariant_under_monotone_transform():
    stream = Stream(12)
    y = (stream.uniform(40) < 0.5).astype(int)
    scores = stream.normal(40, 0, 1)
    a = auc(y, scores)
    b = auc(y, np.exp(scores) * 3 + 7)
    assert a == pytest.approx(b, abs=1e-12)


def test_tuning_curves_shape_and_losses():
    x, y = make_problem(13, n=30)
    grid = {"penalty": ["l2"], "c": [0.01, 1.0]}
    out = grid_search("logreg", grid, x, y, k=3, seed=5)
    points = tuning_curves(out.cv)
    assert len(points) == 2
    for pt in points:
        assert np.isfinite(pt.train_loss)
        assert np.isfinite(pt.val_loss)
    grid2 = {"n_neighbors": [3], "weights": ["uniform"], "metric": ["euclidean"]}
    out2 = grid_search("knn", grid2, x, y, k=3, seed=5)
    points2 = tuning_curves(out2.cv)
    assert len(points2) == 1
    assert points2[0].train_loss is None
