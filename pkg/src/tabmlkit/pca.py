"""Covariance, Jacobi eigendecomposition, projection, and loadings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotSymmetric, TooFewRows

_OFFDIAG_TOL = 1e-12
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray  # length p
    components: np.ndarray  # p x k_retained, orthonormal columns
    eigenvalues: np.ndarray  # all p, descending, clamped at 0
    explained_variance_ratio: np.ndarray  # all p
    k_retained: int


@dataclass(frozen=True)
class LoadingTable:
    features: tuple[str, ...]
    component_names: tuple[str, ...]
    values: np.ndarray  # len(features) x len(component_names)


def covariance(x: np.ndarray) -> np.ndarray:
    """C = X'X/(n-1) after centering; symmetrized exactly."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewRows("covariance requires at least 2 rows")
    xc = x - x.mean(axis=0)
    c = xc.T @ xc / (x.shape[0] - 1)
    return (c + c.T) / 2.0


def eigh(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen pairs of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away each off-diagonal entry in row order until the largest
    off-diagonal magnitude falls below 1e-12 (at most 100 sweeps). Pairs come
    back sorted by descending eigenvalue, each eigenvector flipped so its
    largest-magnitude entry is positive.
    """
    a = np.asarray(c, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric("eigh requires a square matrix")
    if a.shape[0] == 0:
        raise NotSymmetric("eigh requires a nonempty matrix")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > 1e-8:
        raise NotSymmetric(f"matrix is not symmetric (max |A - A'| = {asym:.3e})")
    a = (a + a.T) / 2.0
    p = a.shape[0]
    v = np.eye(p)

    if p > 1:
        converged = False
        for _ in range(_MAX_SWEEPS):
            off = 0.0
            for i in range(p - 1):
                for j in range(i + 1, p):
                    aij = a[i, j]
                    if abs(aij) <= _OFFDIAG_TOL:
                        continue
                    off = max(off, abs(aij))
                    theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                    if theta == 0.0:
                        t = 1.0
                    cos = 1.0 / np.hypot(t, 1.0)
                    sin = t * cos
                    # Rotate rows/columns i and j of A, and columns of V.
                    row_i, row_j = a[i, :].copy(), a[j, :].copy()
                    a[i, :] = cos * row_i - sin * row_j
                    a[j, :] = sin * row_i + cos * row_j
                    col_i, col_j = a[:, i].copy(), a[:, j].copy()
                    a[:, i] = cos * col_i - sin * col_j
                    a[:, j] = sin * col_i + cos * col_j
                    a[i, j] = 0.0
                    a[j, i] = 0.0
                    vi, vj = v[:, i].copy(), v[:, j].copy()
                    v[:, i] = cos * vi - sin * vj
                    v[:, j] = sin * vi + cos * vj
            max_off = float(np.max(np.abs(a - np.diag(np.diag(a)))))
            if max_off <= _OFFDIAG_TOL:
                converged = True
                break
        if not converged:
            max_off = float(np.max(np.abs(a - np.diag(np.diag(a)))))
            if max_off > _OFFDIAG_TOL:
                raise NoConvergence(
                    f"Jacobi sweep limit reached, off-diagonal residual {max_off:.3e}",
                    residual=max_off,
                )

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = v[:, order]
    for k in range(p):
        idx = int(np.argmax(np.abs(vectors[:, k])))
        if vectors[idx, k] < 0:
            vectors[:, k] = -vectors[:, k]
    return values, vectors


def fit_pca(
    z: np.ndarray,
    k: int | None = None,
    variance_target: float | None = None,
) -> PcaModel:
    """Center, eigendecompose the covariance, and retain components.

    Exactly one of ``k`` (fixed count) or ``variance_target`` (smallest count
    whose cumulative explained-variance ratio reaches the target) selects the
    retained components. Input is re-centered here regardless of upstream
    standardization.
    """
    z = np.asarray(z, dtype=np.float64)
    if (k is None) == (variance_target is None):
        raise ValueError("specify exactly one of k or variance_target")
    mean = z.mean(axis=0)
    c = covariance(z)
    values, vectors = eigh(c)
    values = np.where((values < 0) & (values >= -1e-10), 0.0, values)
    total = float(values.sum())
    ratios = values / total if total > 0 else np.zeros_like(values)
    p = len(values)
    if k is not None:
        if not 1 <= k <= p:
            raise DimensionMismatch(f"k={k} outside [1, {p}]")
        retained = int(k)
    else:
        if not 0.0 < variance_target <= 1.0:
            raise ValueError(f"variance_target {variance_target} outside (0, 1]")
        cum = np.cumsum(ratios)
        retained = int(np.searchsorted(cum, variance_target - 1e-12) + 1)
        retained = min(retained, p)
    return PcaModel(mean, vectors[:, :retained].copy(), values, ratios, retained)


def transform(m: PcaModel, x: np.ndarray) -> np.ndarray:
    """Scores Z = (x - mean) V_K."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if x.shape[1] != len(m.mean):
        raise DimensionMismatch(f"matrix has {x.shape[1]} columns, model expects {len(m.mean)}")
    z = (x - m.mean) @ m.components
    return z[0] if single else z


def inverse_transform(m: PcaModel, scores: np.ndarray) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores.reshape(1, -1)
    if scores.shape[1] != m.k_retained:
        raise DimensionMismatch(
            f"scores have {scores.shape[1]} columns, model retains {m.k_retained}"
        )
    return scores @ m.components.T + m.mean


def scree_data(m: PcaModel) -> list[tuple[int, float, float, float]]:
    """(component index from 1, eigenvalue, ratio, cumulative ratio) rows."""
    out = []
    cum = 0.0
    for i, (val, ratio) in enumerate(zip(m.eigenvalues, m.explained_variance_ratio), start=1):
        cum += float(ratio)
        out.append((i, float(val), float(ratio), cum))
    return out


def loading_table(m: PcaModel, feature_names: list[str]) -> LoadingTable:
    if len(feature_names) != m.components.shape[0]:
        raise DimensionMismatch(
            f"{len(feature_names)} names for {m.components.shape[0]} features"
        )
    names = tuple(f"PC{i}" for i in range(1, m.k_retained + 1))
    return LoadingTable(tuple(feature_names), names, m.components.copy())
