"""Standardization, one-hot encoding, IQR capping, stratified splitting."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ColumnNotCategorical,
    ColumnNotFound,
    CountMismatch,
    DataError,
    DimensionMismatch,
    EmptyMatrix,
    LabelNotBinary,
    RatioSumInvalid,
    TooFewValues,
)
from .rng import Stream, derive_seed
from .tabular import CategoricalColumn, Column, NumericColumn, Table, quantile_type7


@dataclass(frozen=True)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray  # sample std; 0 marks a zero-variance column
    zero_variance_columns: tuple[int, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.means, dtype=np.float64)
        s = np.asarray(self.stds, dtype=np.float64)
        if m.shape != s.shape:
            raise DimensionMismatch("means and stds must have equal length")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)


@dataclass(frozen=True)
class EncodingMap:
    source: str
    levels: tuple[str, ...]  # alphabetical
    level_to_column: dict[str, str]  # dropped level absent when drop_first
    drop_first: bool

    @property
    def output_columns(self) -> list[str]:
        return [self.level_to_column[lev] for lev in self.levels if lev in self.level_to_column]


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self):
        for part in ("train", "validation", "test"):
            arr = np.sort(np.asarray(getattr(self, part), dtype=np.int64))
            arr.flags.writeable = False
            object.__setattr__(self, part, arr)


def standardize_fit(x: np.ndarray) -> tuple[np.ndarray, ScalerParams]:
    """Per-feature z-score with sample std; returns transformed data and params.

    Zero-variance columns map to all zeros and are flagged on the params.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise EmptyMatrix("standardize_fit requires a matrix with at least 2 rows")
    means = x.mean(axis=0)
    stds = x.std(axis=0, ddof=1)
    zero = tuple(int(j) for j in np.nonzero(stds == 0.0)[0])
    params = ScalerParams(means, stds, zero)
    return standardize_apply(params, x), params


def standardize_apply(params: ScalerParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != len(params.means):
        raise DimensionMismatch(
            f"matrix has {x.shape[1]} columns, scaler expects {len(params.means)}"
        )
    safe = np.where(params.stds > 0.0, params.stds, 1.0)
    z = (x - params.means) / safe
    z[:, params.stds == 0.0] = 0.0
    return z


def one_hot(t: Table, column: str, drop_first: bool = False) -> tuple[Table, EncodingMap]:
    """Replace a categorical column with 0/1 indicator columns (alphabetical
    level order, alphabetically-first level dropped when drop_first).
    Missing categories encode as all zeros."""
    col = t.column(column)
    if not isinstance(col, CategoricalColumn):
        raise ColumnNotCategorical(f"column {column!r} is not categorical")
    levels = tuple(sorted(col.levels))
    kept = levels[1:] if drop_first else levels
    mapping = {lev: f"{column}_{lev}" for lev in kept}
    existing = set(t.column_names) - {column}
    for out_name in mapping.values():
        if out_name in existing:
            raise DataError(f"one-hot output column {out_name!r} already exists")
    em = EncodingMap(column, levels, mapping, drop_first)
    return _apply_encoding_inner(em, t), em


def apply_encoding(em: EncodingMap, t: Table, strict: bool = True) -> Table:
    """Apply a fitted EncodingMap to a new table holding the source column.

    Unseen levels raise UnseenLevel in strict mode; otherwise they encode as
    all zeros with a warning.
    """
    return _apply_encoding_inner(em, t, check_unseen=True, strict=strict)


def _apply_encoding_inner(em: EncodingMap, t: Table, check_unseen: bool = False, strict: bool = True) -> Table:
    col = t.column(em.source)
    if not isinstance(col, CategoricalColumn):
        raise ColumnNotCategorical(f"column {em.source!r} is not categorical")
    if check_unseen:
        unseen = sorted(set(col.levels) - set(em.levels))
        present = {col.levels[c] for c in col.codes if c >= 0}
        unseen = [lev for lev in unseen if lev in present]
        if unseen:
            from .errors import UnseenLevel

            if strict:
                raise UnseenLevel(f"levels {unseen} in column {em.source!r} were not fitted")
            warnings.warn(
                f"unseen levels {unseen} in column {em.source!r} encoded as all zeros",
                stacklevel=2,
            )
    kept = [lev for lev in em.levels if lev in em.level_to_column]
    row_levels = np.array([col.level_of(i) or "" for i in range(col.n_rows)], dtype=object)
    new_cols: list[Column] = []
    for c in t.columns:
        if c.name != em.source:
            new_cols.append(c)
            continue
        for lev in kept:
            values = (row_levels == lev).astype(np.float64)
            new_cols.append(NumericColumn(em.level_to_column[lev], values))
    return Table(t.name, tuple(new_cols))


def iqr_fences(values: np.ndarray, k: float = 1.5) -> tuple[float, float]:
    """[q1 - k*IQR, q3 + k*IQR] with type-7 quartiles over non-missing values."""
    x = np.asarray(values, dtype=np.float64)
    x = np.sort(x[~np.isnan(x)])
    if len(x) < 4:
        raise TooFewValues("IQR fences need at least 4 values")
    q1 = quantile_type7(x, 0.25)
    q3 = quantile_type7(x, 0.75)
    iqr = q3 - q1
    return q1 - k * iqr, q3 + k * iqr


def cap_to_fences(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64).copy()
    mask = ~np.isnan(x)
    x[mask] = np.clip(x[mask], lo, hi)
    return x


def iqr_cap(values: np.ndarray, k: float = 1.5) -> np.ndarray:
    """Clip values outside the IQR fences to the fence values."""
    lo, hi = iqr_fences(values, k)
    return cap_to_fences(values, lo, hi)


def _largest_remainder(quotas: np.ndarray, total: int) -> np.ndarray:
    """Integer allocation summing to ``total``: floor quotas, then hand out the
    remainder by descending fractional part (ties -> earlier position)."""
    base = np.floor(quotas).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        frac = quotas - np.floor(quotas)
        order = np.argsort(-frac, kind="stable")
        for idx in order[:short]:
            base[idx] += 1
    return base


def stratified_split(
    t: Table,
    label: str,
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 42,
    counts_override: tuple[int, int, int] | None = None,
) -> SplitIndices:
    """Per-class shuffle-then-allocate three-way split.

    ``ratios`` must sum to 1; ``counts_override`` instead fixes the exact
    split sizes (it must sum to the row count). Per-class counts deviate
    from exact proportion by at most one row. Deterministic in ``seed``.
    """
    col = t.column(label)
    if not isinstance(col, CategoricalColumn):
        raise LabelNotBinary(f"label column {label!r} must be categorical")
    if np.any(col.codes < 0):
        raise LabelNotBinary(f"label column {label!r} has missing values")
    classes = np.unique(col.codes)
    if len(classes) != 2:
        raise LabelNotBinary(f"label column {label!r} has {len(classes)} classes, need 2")
    n = t.n_rows
    class_indices = [np.nonzero(col.codes == c)[0] for c in classes]
    class_counts = [len(ix) for ix in class_indices]

    if counts_override is not None:
        targets = np.asarray(counts_override, dtype=np.int64)
        if targets.sum() != n or np.any(targets < 0):
            raise CountMismatch(f"counts_override {counts_override} does not sum to {n} rows")
        # Allocate class 0 against the global targets; class 1 takes the rest.
        n0 = class_counts[0]
        quota0 = targets.astype(np.float64) * (n0 / n)
        alloc0 = _largest_remainder(quota0, n0)
        alloc0 = np.minimum(alloc0, targets)  # guard degenerate corners
        deficit = n0 - int(alloc0.sum())
        for s in range(3):
            if deficit <= 0:
                break
            room = int(targets[s] - alloc0[s])
            take = min(room, deficit)
            alloc0[s] += take
            deficit -= take
        allocations = [alloc0, targets - alloc0]
    else:
        r = np.asarray(ratios, dtype=np.float64)
        if abs(float(r.sum()) - 1.0) > 1e-9 or np.any(r < 0):
            raise RatioSumInvalid(f"ratios {ratios} must be nonnegative and sum to 1")
        allocations = [_largest_remainder(r * nc, nc) for nc in class_counts]

    parts: list[list[np.ndarray]] = [[], [], []]
    for c, (indices, alloc) in enumerate(zip(class_indices, allocations)):
        shuffled = indices.copy()
        Stream(derive_seed(seed, f"split:class={c}")).shuffle(shuffled)
        a, b = int(alloc[0]), int(alloc[0] + alloc[1])
        parts[0].append(shuffled[:a])
        parts[1].append(shuffled[a:b])
        parts[2].append(shuffled[b:])
    train, val, test = (np.concatenate(p) if p else np.array([], dtype=np.int64) for p in parts)
    return SplitIndices(train, val, test, seed)
