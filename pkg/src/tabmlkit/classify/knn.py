"""k-nearest-neighbors classifier with deterministic tie handling.

Distance ties resolve to the lower training index (stable sort). Uniform
voting breaks ties by the class with the smaller cumulative distance, then
class 0. Distance weighting uses 1/d, and an exact-zero distance hands the
decision to the coincident neighbors outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, KTooLarge


@dataclass(frozen=True)
class KnnModel:
    train_x: np.ndarray
    train_y: np.ndarray
    k: int
    weighting: str = "uniform"  # uniform | distance
    metric: str = "euclidean"  # euclidean | manhattan


def knn_fit(x: np.ndarray, y: np.ndarray, k: int, weighting: str = "uniform",
            metric: str = "euclidean") -> KnnModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if k < 1 or k > len(y):
        raise KTooLarge(f"k={k} outside [1, {len(y)}]")
    if weighting not in ("uniform", "distance"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if metric not in ("euclidean", "manhattan"):
        raise ValueError(f"unknown metric {metric!r}")
    return KnnModel(x, y, int(k), weighting, metric)


def _distances(m: KnnModel, x: np.ndarray) -> np.ndarray:
    if x.shape[1] != m.train_x.shape[1]:
        raise DimensionMismatch(
            f"input has {x.shape[1]} features, model expects {m.train_x.shape[1]}"
        )
    if m.metric == "euclidean":
        sq = (
            (x**2).sum(axis=1)[:, None]
            + (m.train_x**2).sum(axis=1)[None, :]
            - 2.0 * x @ m.train_x.T
        )
        return np.sqrt(np.maximum(sq, 0.0))
    return np.abs(x[:, None, :] - m.train_x[None, :, :]).sum(axis=2)


def _score_and_predict(m: KnnModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    d = _distances(m, x)
    order = np.argsort(d, axis=1, kind="stable")[:, : m.k]
    scores = np.empty(x.shape[0])
    preds = np.empty(x.shape[0], dtype=np.int64)
    for i in range(x.shape[0]):
        nn = order[i]
        nd = d[i, nn]
        ny = m.train_y[nn]
        if m.weighting == "distance" and np.any(nd == 0.0):
            coincident = ny[nd == 0.0]
            scores[i] = coincident.mean()
        elif m.weighting == "distance":
            w = 1.0 / nd
            scores[i] = float(w[ny == 1].sum() / w.sum())
        else:
            scores[i] = float((ny == 1).mean())
        if scores[i] > 0.5:
            preds[i] = 1
        elif scores[i] < 0.5:
            preds[i] = 0
        elif m.weighting == "uniform":
            # Exact vote tie: smaller cumulative distance wins, then class 0.
            d0 = float(nd[ny == 0].sum())
            d1 = float(nd[ny == 1].sum())
            preds[i] = 1 if d1 < d0 else 0
        else:
            preds[i] = 0
    return scores, preds


def knn_predict(m: KnnModel, x: np.ndarray) -> np.ndarray:
    return _score_and_predict(m, x)[1]


def knn_score(m: KnnModel, x: np.ndarray) -> np.ndarray:
    """Weighted positive-class fraction among the k nearest neighbors."""
    return _score_and_predict(m, x)[0]
