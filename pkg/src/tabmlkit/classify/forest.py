"""Random forest: bootstrap-resampled CART trees with per-node feature
subsampling and majority voting (ties to class 0)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput
from ..rng import Stream, derive_seed
from .tree import TreeModel, TreeParams, resolve_class_weights, tree_fit, tree_predict


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    criterion: str = "gini"
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str | int | None = "sqrt"
    bootstrap: bool = True
    class_weight: str | None = None
    ccp_alpha: float = 0.0
    seed: int = 21


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]
    params: ForestParams


def forest_fit(x: np.ndarray, y: np.ndarray, params: ForestParams | None = None) -> ForestModel:
    """Each tree draws its bootstrap sample and split randomness from a
    stream derived from (seed, tree index), so the forest is identical
    across runs and thread counts. Balanced class weights come from the
    full training labels, not each bootstrap sample."""
    params = params or ForestParams()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("forest_fit requires at least one sample")
    if params.n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    n = x.shape[0]
    class_weights = resolve_class_weights(y, params.class_weight)
    tree_params_base = dict(
        criterion=params.criterion,
        max_depth=params.max_depth,
        min_samples_split=params.min_samples_split,
        min_samples_leaf=params.min_samples_leaf,
        max_features=params.max_features,
        ccp_alpha=params.ccp_alpha,
    )
    trees = []
    for m in range(params.n_estimators):
        stream = Stream(derive_seed(params.seed, f"forest:tree={m}"))
        if params.bootstrap:
            idx = stream.integers(n, n)
            xs, ys = x[idx], y[idx]
        else:
            xs, ys = x, y
        tp = TreeParams(seed=stream.next_u64(), **tree_params_base)
        trees.append(tree_fit(xs, ys, tp, class_weights=class_weights))
    return ForestModel(tuple(trees), params)


def forest_score(m: ForestModel, x: np.ndarray) -> np.ndarray:
    """Fraction of trees voting for the positive class."""
    votes = np.stack([tree_predict(t, x) for t in m.trees], axis=0)
    return votes.mean(axis=0)


def forest_predict(m: ForestModel, x: np.ndarray) -> np.ndarray:
    """Majority vote; an exact tie goes to class 0."""
    return (forest_score(m, x) > 0.5).astype(np.int64)
