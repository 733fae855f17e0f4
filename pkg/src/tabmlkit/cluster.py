"""K-Means with k-means++ seeding and restarts, silhouette scoring, K selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, KTooLarge, RowMismatch, SingleCluster, TooFewPoints
from .rng import Stream, derive_seed
from .tabular import NumericColumn, Table


@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray  # k x d
    labels: np.ndarray  # per-row cluster index
    inertia: float
    n_iter: int
    seed: int
    inertia_path: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class KSelectionReport:
    ks: tuple[int, ...]
    inertias: tuple[float, ...]
    silhouettes: tuple[float, ...]
    chosen_k: int


def _sq_dists(z: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (z**2).sum(axis=1)[:, None] + (centers**2).sum(axis=1)[None, :] - 2.0 * z @ centers.T
    return np.maximum(d, 0.0)


def _plus_plus_init(z: np.ndarray, k: int, stream: Stream) -> np.ndarray:
    n = z.shape[0]
    centers = np.empty((k, z.shape[1]))
    first = stream.next_below(n)
    centers[0] = z[first]
    closest = _sq_dists(z, centers[:1]).ravel()
    for j in range(1, k):
        idx = stream.weighted_index(closest)
        centers[j] = z[idx]
        closest = np.minimum(closest, _sq_dists(z, centers[j : j + 1]).ravel())
    return centers


def _lloyd(z: np.ndarray, centers: np.ndarray, k: int, max_iter: int):
    n = z.shape[0]
    labels = np.argmin(_sq_dists(z, centers), axis=1)  # argmin ties -> lowest index
    path: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        # Repair empty clusters with the point farthest from its own centroid.
        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            dists = _sq_dists(z, centers)
            own = dists[np.arange(n), labels].copy()
            for j in np.nonzero(counts == 0)[0]:
                far = int(np.argmax(own))
                labels[far] = j
                own[far] = -1.0
            counts = np.bincount(labels, minlength=k)
        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, labels, z)
        new_centers /= counts[:, None]
        new_labels = np.argmin(_sq_dists(z, new_centers), axis=1)
        path.append(float(_sq_dists(z, new_centers)[np.arange(n), new_labels].sum()))
        centers = new_centers
        # Stable labels imply zero centroid shift on the next pass, so this
        # stop is at least as strict as the shift-below-tol contract.
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(_sq_dists(z, centers)[np.arange(n), labels].sum())
    return centers, labels, inertia, n_iter, path


def kmeans_fit(
    z: np.ndarray,
    k: int,
    seed: int = 42,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> KMeansModel:
    """Best of ``n_init`` k-means++ / Lloyd restarts by inertia.

    Each restart draws from its own stream derived from (seed, restart index),
    so the winner does not depend on evaluation order. Distance ties assign to
    the lowest cluster index; an emptied cluster is repaired by reseating the
    point farthest from its centroid. Iteration stops once labels stop
    changing (which implies the centroid shift has fallen below ``tol``) or at
    ``max_iter``.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if z.shape[0] == 0:
        raise EmptyInput("kmeans_fit requires at least one row")
    if not 1 <= k <= z.shape[0]:
        raise KTooLarge(f"k={k} outside [1, {z.shape[0]}]")
    del tol  # stopping on stable labels is stricter; kept for the call contract
    best = None
    for restart in range(n_init):
        stream = Stream(derive_seed(seed, f"kmeans:restart={restart}"))
        centers = _plus_plus_init(z, k, stream)
        centers, labels, inertia, n_iter, path = _lloyd(z, centers, k, max_iter)
        if best is None or inertia < best[0]:  # ties keep the lower restart index
            best = (inertia, centers, labels, n_iter, path)
    inertia, centers, labels, n_iter, path = best
    return KMeansModel(centers, labels, inertia, n_iter, seed, tuple(path))


def silhouette(z: np.ndarray, labels: np.ndarray) -> float:
    """Mean of the standard per-point (b - a) / max(a, b) silhouette.

    Singleton clusters score 0 for their point. Distances are computed in row
    blocks so memory stays bounded for the ~10^4-row tables this handles.
    """
    z = np.asarray(z, dtype=np.float64)
    labels = np.asarray(labels)
    n = z.shape[0]
    if n < 3:
        raise TooFewPoints("silhouette requires at least 3 points")
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise SingleCluster("silhouette requires at least 2 clusters")
    sizes = {int(c): int((labels == c).sum()) for c in uniq}
    onehot = np.stack([(labels == c).astype(np.float64) for c in uniq], axis=1)  # n x k
    scores = np.empty(n)
    block = max(1, min(n, 2_000_000 // max(n, 1)))
    sq = (z**2).sum(axis=1)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = sq[start:stop, None] + sq[None, :] - 2.0 * z[start:stop] @ z.T
        d = np.sqrt(np.maximum(d, 0.0))
        sums = d @ onehot  # block x k, total distance to each cluster
        for r, i in enumerate(range(start, stop)):
            own = int(np.nonzero(uniq == labels[i])[0][0])
            size_own = sizes[int(labels[i])]
            if size_own == 1:
                scores[i] = 0.0
                continue
            a = sums[r, own] / (size_own - 1)
            b = min(
                sums[r, c] / sizes[int(uniq[c])] for c in range(len(uniq)) if c != own
            )
            denom = max(a, b)
            scores[i] = (b - a) / denom if denom > 0 else 0.0
    return float(scores.mean())


def select_k(z: np.ndarray, k_range: tuple[int, int], seed: int = 42) -> KSelectionReport:
    """Fit each k in [k_min, k_max] (shared seed policy) and pick the k with
    the highest mean silhouette (ties -> smaller k). Inertia is reported as
    elbow-curve data alongside."""
    z = np.asarray(z, dtype=np.float64)
    k_min, k_max = k_range
    if not 2 <= k_min <= k_max <= z.shape[0] - 1:
        raise KTooLarge(f"k range [{k_min}, {k_max}] invalid for {z.shape[0]} rows")
    ks, inertias, sils = [], [], []
    for k in range(k_min, k_max + 1):
        model = kmeans_fit(z, k, seed=seed)
        ks.append(k)
        inertias.append(model.inertia)
        sils.append(silhouette(z, model.labels))
    chosen = ks[int(np.argmax(sils))]  # argmax ties -> first, i.e. smaller k
    return KSelectionReport(tuple(ks), tuple(inertias), tuple(sils), chosen)


def characterize(model: KMeansModel, original: Table) -> Table:
    """Per-cluster means of every numeric feature in unstandardized space."""
    if len(model.labels) != original.n_rows:
        raise RowMismatch(
            f"{len(model.labels)} labels for a table of {original.n_rows} rows"
        )
    k = model.centroids.shape[0]
    numeric = original.numeric_columns()
    cols = [
        NumericColumn("cluster", np.arange(k, dtype=np.float64)),
        NumericColumn(
            "size", np.bincount(model.labels, minlength=k).astype(np.float64)
        ),
    ]
    for c in numeric:
        means = np.empty(k)
        for j in range(k):
            vals = c.values[model.labels == j]
            vals = vals[~np.isnan(vals)]
            means[j] = vals.mean() if len(vals) else np.nan
        cols.append(NumericColumn(c.name, means))
    return Table(f"{original.name}:cluster_means", tuple(cols))
