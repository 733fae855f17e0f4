"""Shapley-value feature attribution with an interventional value function.

``v(S)`` is the mean model output over background rows with the instance's
values imposed on the features in S. The exact method enumerates all 2^p
subsets (guarded at p <= 12); the sampling method averages marginal
contributions along seeded random feature orderings, whose telescoping sum
makes the efficiency identity hold at any permutation count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBackground, TooManyFeatures
from .rng import Stream, derive_seed


@dataclass(frozen=True)
class ShapExplanation:
    base_value: float
    values: np.ndarray  # per-feature attribution
    instance: np.ndarray
    scale: str = "output"  # e.g. "log-odds" for logistic decision values

    @property
    def prediction(self) -> float:
        return self.base_value + float(self.values.sum())


@dataclass(frozen=True)
class ShapSummary:
    feature_indices: tuple[int, ...]  # descending mean |phi|, index tiebreak
    mean_abs_values: tuple[float, ...]
    feature_names: tuple[str, ...] | None = None


def _as_background(background) -> np.ndarray:
    bg = np.asarray(background, dtype=np.float64)
    if bg.ndim == 1:
        bg = bg.reshape(1, -1)
    if bg.shape[0] == 0:
        raise EmptyBackground("background must contain at least one row")
    return bg


def shap_exact(predict, background, x) -> ShapExplanation:
    """Exact Shapley values by subset enumeration (p <= 12)."""
    bg = _as_background(background)
    x = np.asarray(x, dtype=np.float64).ravel()
    p = len(x)
    if p > 12:
        raise TooManyFeatures(f"exact enumeration is guarded at p <= 12, got {p}")
    n_masks = 1 << p
    v = np.empty(n_masks)
    composite = np.empty_like(bg)
    for mask in range(n_masks):
        composite[:] = bg
        for j in range(p):
            if mask >> j & 1:
                composite[:, j] = x[j]
        v[mask] = float(np.mean(predict(composite)))
    fact = [math.factorial(i) for i in range(p + 1)]
    weights = [fact[s] * fact[p - s - 1] / fact[p] for s in range(p)]
    phi = np.zeros(p)
    for mask in range(n_masks):
        size = bin(mask).count("1")
        for j in range(p):
            if mask >> j & 1:
                continue
            phi[j] += weights[size] * (v[mask | (1 << j)] - v[mask])
    return ShapExplanation(float(v[0]), phi, x)


def shap_sample(predict, background, x, n_permutations: int, seed: int = 42) -> ShapExplanation:
    """Permutation-sampling estimate of the Shapley values."""
    bg = _as_background(background)
    x = np.asarray(x, dtype=np.float64).ravel()
    p = len(x)
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    base = float(np.mean(predict(bg)))
    phi = np.zeros(p)
    for k in range(n_permutations):
        stream = Stream(derive_seed(seed, f"shap:perm={k}"))
        order = stream.permutation(p)
        composite = bg.copy()
        prev = base
        for j in order:
            composite[:, j] = x[j]
            cur = float(np.mean(predict(composite)))
            phi[j] += cur - prev
            prev = cur
    return ShapExplanation(base, phi / n_permutations, x)


def shap_summary(
    predict,
    background,
    instances,
    n_permutations: int,
    seed: int = 42,
    feature_names: list[str] | None = None,
) -> ShapSummary:
    """Mean |phi| per feature over the instances, sorted descending with a
    stable feature-index tiebreak."""
    instances = np.asarray(instances, dtype=np.float64)
    if instances.ndim == 1:
        instances = instances.reshape(1, -1)
    if instances.shape[0] == 0:
        raise EmptyBackground("shap_summary needs at least one instance")
    abs_sum = np.zeros(instances.shape[1])
    for i in range(instances.shape[0]):
        expl = shap_sample(
            predict, background, instances[i], n_permutations,
            seed=derive_seed(seed, f"shap:instance={i}"),
        )
        abs_sum += np.abs(expl.values)
    mean_abs = abs_sum / instances.shape[0]
    order = np.argsort(-mean_abs, kind="stable")
    names = None
    if feature_names is not None:
        names = tuple(feature_names[int(j)] for j in order)
    return ShapSummary(
        tuple(int(j) for j in order),
        tuple(float(mean_abs[int(j)]) for j in order),
        names,
    )
