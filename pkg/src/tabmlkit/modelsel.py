"""Stratified k-fold CV, exhaustive grid search over the five model kinds,
and the confusion-matrix / metric panel used by every evaluation surface."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .classify import (
    ForestParams,
    TreeParams,
    forest_fit,
    forest_predict,
    forest_score,
    knn_fit,
    knn_predict,
    knn_score,
    logreg_fit,
    logreg_mean_logloss,
    logreg_predict,
    logreg_predict_proba,
    svm_fit,
    svm_predict,
    svm_score,
    tree_fit,
    tree_predict,
    tree_score,
)
from .errors import ClassTooSmall, DataError, LabelNotBinary, LengthMismatch, SingleClass, ToolkitError
from .rng import Stream, derive_seed

MODEL_KINDS = ("logreg", "tree", "knn", "forest", "svm")


# --- model registry -------------------------------------------------------

def _fit_logreg(x, y, params):
    return logreg_fit(x, y, penalty=params["penalty"], c=params["c"],
                      max_iter=params.get("max_iter", 2000))


def _fit_tree(x, y, params):
    known = {f for f in TreeParams.__dataclass_fields__}
    return tree_fit(x, y, TreeParams(**{k: v for k, v in params.items() if k in known}))


def _fit_knn(x, y, params):
    return knn_fit(x, y, k=params["n_neighbors"], weighting=params.get("weights", "uniform"),
                   metric=params.get("metric", "euclidean"))


def _fit_forest(x, y, params):
    known = {f for f in ForestParams.__dataclass_fields__}
    return forest_fit(x, y, ForestParams(**{k: v for k, v in params.items() if k in known}))


def _fit_svm(x, y, params):
    return svm_fit(x, y, c=params["c"], gamma=params.get("gamma", "scale"),
                   max_passes=params.get("max_passes", 200))


_REGISTRY = {
    "logreg": (_fit_logreg, logreg_predict, logreg_predict_proba, logreg_mean_logloss),
    "tree": (_fit_tree, tree_predict, tree_score, None),
    "knn": (_fit_knn, knn_predict, knn_score, None),
    "forest": (_fit_forest, forest_predict, forest_score, None),
    "svm": (_fit_svm, svm_predict, svm_score, None),
}


def fit_model(kind: str, x, y, params: dict):
    if kind not in _REGISTRY:
        raise DataError(f"unknown model kind {kind!r}")
    return _REGISTRY[kind][0](x, y, params)


def predict_model(kind: str, model, x):
    return _REGISTRY[kind][1](model, x)


def score_model(kind: str, model, x):
    """Real-valued ranking score (probability / leaf or vote fraction /
    neighbor fraction / signed decision value)."""
    return _REGISTRY[kind][2](model, x)


def default_grid(kind: str) -> dict:
    """The published hyperparameter grid for each model kind."""
    if kind == "logreg":
        return {"penalty": ["l1", "l2"], "c": [0.001, 0.01, 0.1, 1, 10]}
    if kind == "tree":
        return {
            "criterion": ["gini", "entropy", "log_loss"],
            "max_depth": [None, 5, 10, 20, 50],
            "min_samples_split": [2, 5, 10, 20],
            "min_samples_leaf": [1, 2, 5, 10],
            "max_features": [None, "sqrt", "log2"],
            "max_leaf_nodes": [None, 10, 50, 100],
            "min_impurity_decrease": [0.0, 0.01, 0.1],
            "splitter": ["best", "random"],
            "class_weight": [None, "balanced"],
            "ccp_alpha": [0.0, 0.01, 0.1],
        }
    if kind == "knn":
        return {
            "n_neighbors": [3, 5, 7, 9],
            "weights": ["uniform", "distance"],
            "metric": ["euclidean", "manhattan"],
        }
    if kind == "forest":
        return {
            "n_estimators": [50, 100],
            "max_depth": [5, 10, None],
            "min_samples_split": [2, 5],
            "min_samples_leaf": [1, 2],
            "max_features": ["sqrt", "log2"],
            "bootstrap": [True, False],
            "criterion": ["gini", "entropy"],
            "class_weight": [None, "balanced"],
        }
    if kind == "svm":
        return {"c": [0.1, 1, 10], "gamma": ["scale", "auto"]}
    raise DataError(f"unknown model kind {kind!r}")


def grid_size(grid: dict) -> int:
    size = 1
    for values in grid.values():
        if not values:
            raise DataError("parameter grid has an empty value list")
        size *= len(values)
    return size


def enumerate_grid(grid: dict) -> list[dict]:
    """Cartesian product in lexicographic order: parameter names in insertion
    order, values in listed order."""
    names = list(grid.keys())
    return [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]


# --- cross-validation ------------------------------------------------------

def stratified_kfold(y: np.ndarray, k: int = 5, seed: int = 42) -> list[np.ndarray]:
    """k disjoint folds; per-fold class counts within one of proportional."""
    y = np.asarray(y).astype(np.int64)
    classes = np.unique(y)
    folds: list[list[np.ndarray]] = [[] for _ in range(k)]
    for c_pos, c in enumerate(classes):
        idx = np.nonzero(y == c)[0]
        if len(idx) < k:
            raise ClassTooSmall(f"class {c} has {len(idx)} samples, fewer than k={k}")
        shuffled = idx.copy()
        Stream(derive_seed(seed, f"kfold:class={int(c)}")).shuffle(shuffled)
        for i, row in enumerate(shuffled):
            folds[(i + c_pos) % k].append(row)
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


@dataclass(frozen=True)
class CvConfigResult:
    params: dict
    fold_scores: tuple[float, ...]
    mean_score: float
    std_score: float
    train_scores: tuple[float, ...]
    train_mean: float
    train_losses: tuple[float, ...] | None = None
    val_losses: tuple[float, ...] | None = None
    failed: bool = False
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class CvResult:
    model_kind: str
    scoring: str
    k: int
    seed: int
    entries: tuple[CvConfigResult, ...]


@dataclass(frozen=True)
class GridSearchOutcome:
    model_kind: str
    best_params: dict
    best_mean_score: float
    best_index: int
    best_model: object
    cv: CvResult


def binary_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    cm = confusion(y_true, y_pred)
    return _prf(cm.tp, cm.fp, cm.fn)[2]


def accuracy_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


_SCORERS = {"f1_binary": binary_f1, "accuracy": accuracy_score}


def grid_search(
    model_kind: str,
    grid: dict,
    x: np.ndarray,
    y: np.ndarray,
    scoring: str = "f1_binary",
    k: int = 5,
    seed: int = 42,
) -> GridSearchOutcome:
    """Exhaustive search: every configuration is k-fold cross-validated with
    the named metric on the positive class, then the best (ties -> first in
    enumeration order) is refitted on the full data. A configuration whose
    fit fails scores -inf with a recorded diagnostic instead of aborting."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if scoring not in _SCORERS:
        raise DataError(f"unknown scoring {scoring!r}")
    scorer = _SCORERS[scoring]
    loss_fn = _REGISTRY[model_kind][3] if model_kind in _REGISTRY else None
    if model_kind not in _REGISTRY:
        raise DataError(f"unknown model kind {model_kind!r}")
    folds = stratified_kfold(y, k=k, seed=seed)
    all_idx = np.arange(len(y))
    entries = []
    for params in enumerate_grid(grid):
        fold_scores, train_scores = [], []
        train_losses, val_losses = [], []
        diagnostics: list[str] = []
        failed = False
        for fi, fold in enumerate(folds):
            train_idx = np.setdiff1d(all_idx, fold, assume_unique=True)
            try:
                model = fit_model(model_kind, x[train_idx], y[train_idx], params)
                pred_val = predict_model(model_kind, model, x[fold])
                pred_tr = predict_model(model_kind, model, x[train_idx])
                fold_scores.append(scorer(y[fold], pred_val))
                train_scores.append(scorer(y[train_idx], pred_tr))
                if loss_fn is not None:
                    train_losses.append(loss_fn(model, x[train_idx], y[train_idx]))
                    val_losses.append(loss_fn(model, x[fold], y[fold]))
            except (ToolkitError, ValueError, ZeroDivisionError, FloatingPointError) as exc:
                failed = True
                diagnostics.append(f"fold {fi}: {type(exc).__name__}: {exc}")
                break
        if failed:
            entries.append(CvConfigResult(params, (), -math.inf, 0.0, (), -math.inf,
                                          None, None, True, tuple(diagnostics)))
            continue
        scores = np.array(fold_scores)
        entries.append(
            CvConfigResult(
                params,
                tuple(float(s) for s in fold_scores),
                float(scores.mean()),
                float(scores.std()),
                tuple(float(s) for s in train_scores),
                float(np.mean(train_scores)),
                tuple(train_losses) if loss_fn is not None else None,
                tuple(val_losses) if loss_fn is not None else None,
            )
        )
    means = [e.mean_score for e in entries]
    best_index = int(np.argmax(means))  # ties -> first in enumeration order
    if not math.isfinite(entries[best_index].mean_score):
        raise DataError(
            f"every configuration failed; first diagnostic: {entries[0].diagnostics[:1]}"
        )
    best_params = entries[best_index].params
    best_model = fit_model(model_kind, x, y, best_params)
    cv = CvResult(model_kind, scoring, k, seed, tuple(entries))
    return GridSearchOutcome(
        model_kind, best_params, entries[best_index].mean_score, best_index, best_model, cv
    )


@dataclass(frozen=True)
class TuningPoint:
    index: int
    train_score: float
    val_score: float
    train_loss: float | None
    val_loss: float | None


def tuning_curves(cv: CvResult) -> list[TuningPoint]:
    """Per-configuration train/validation score (and loss where defined),
    in grid enumeration order."""
    points = []
    for i, e in enumerate(cv.entries):
        points.append(
            TuningPoint(
                i,
                e.train_mean,
                e.mean_score,
                float(np.mean(e.train_losses)) if e.train_losses else None,
                float(np.mean(e.val_losses)) if e.val_losses else None,
            )
        )
    return points


# --- evaluation metrics -----------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvaluationReport:
    confusion: ConfusionMatrix
    accuracy: float
    per_class: tuple[ClassMetrics, ClassMetrics]  # index = class label
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    binary_precision: float
    binary_recall: float
    binary_f1: float
    auc: float | None


def confusion(y_true, y_pred) -> ConfusionMatrix:
    """Counts with the positive class = 1."""
    y_true = np.asarray(y_true).astype(np.int64)
    y_pred = np.asarray(y_pred).astype(np.int64)
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} truths vs {len(y_pred)} predictions")
    for arr, what in ((y_true, "labels"), (y_pred, "predictions")):
        if not np.all(np.isin(arr, (0, 1))):
            raise LabelNotBinary(f"{what} must be 0/1")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    return ConfusionMatrix(tn, fp, fn, tp)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return precision, recall, f1


def auc(y_true, scores) -> float:
    """Mann-Whitney rank AUC; tied scores count one half."""
    y_true = np.asarray(y_true).astype(np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    if len(y_true) != len(scores):
        raise LengthMismatch(f"{len(y_true)} truths vs {len(scores)} scores")
    n_pos = int((y_true == 1).sum())
    n_neg = int((y_true == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("auc requires both classes present")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # average rank, 1-based
        i = j + 1
    rank_sum_pos = float(ranks[y_true == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def metric_panel(cm: ConfusionMatrix, y_true=None, scores=None) -> EvaluationReport:
    """Accuracy, per-class / macro / weighted / binary precision-recall-F1,
    and rank AUC when ranking scores are supplied."""
    if y_true is not None and cm.total != len(y_true):
        raise LengthMismatch(f"confusion total {cm.total} != {len(y_true)} labels")
    accuracy = (cm.tn + cm.tp) / cm.total if cm.total > 0 else 0.0
    # class 1 = positive; class 0 metrics come from the transposed view
    p1, r1, f1 = _prf(cm.tp, cm.fp, cm.fn)
    p0, r0, f0 = _prf(cm.tn, cm.fn, cm.fp)
    support0 = cm.tn + cm.fp
    support1 = cm.tp + cm.fn
    total = max(cm.total, 1)
    per_class = (
        ClassMetrics(p0, r0, f0, support0),
        ClassMetrics(p1, r1, f1, support1),
    )
    auc_value = None
    if scores is not None and y_true is not None:
        auc_value = auc(y_true, scores)
    return EvaluationReport(
        confusion=cm,
        accuracy=float(accuracy),
        per_class=per_class,
        macro_precision=(p0 + p1) / 2.0,
        macro_recall=(r0 + r1) / 2.0,
        macro_f1=(f0 + f1) / 2.0,
        weighted_precision=(p0 * support0 + p1 * support1) / total,
        weighted_recall=(r0 * support0 + r1 * support1) / total,
        weighted_f1=(f0 * support0 + f1 * support1) / total,
        binary_precision=p1,
        binary_recall=r1,
        binary_f1=f1,
        auc=auc_value,
    )


def evaluate_predictions(y_true, y_pred, scores=None) -> EvaluationReport:
    return metric_panel(confusion(y_true, y_pred), y_true, scores)
