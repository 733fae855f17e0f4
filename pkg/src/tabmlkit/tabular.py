"""Column-typed in-memory table with CSV ingestion, audit, and descriptives.

Missing cells are NaN in numeric columns and code -1 in categorical ones.
Tables are frozen after construction (arrays are marked read-only); every
operation here is a pure function.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ColumnNotFound,
    EmptyInput,
    FileUnreadable,
    NoNumericColumns,
    ParseFailure,
    RaggedRow,
)


@dataclass(frozen=True)
class NumericColumn:
    name: str
    values: np.ndarray  # float64; NaN = missing

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_rows(self) -> int:
        return len(self.values)

    def is_missing(self) -> np.ndarray:
        return np.isnan(self.values)


@dataclass(frozen=True)
class CategoricalColumn:
    name: str
    codes: np.ndarray  # int32; -1 = missing
    levels: tuple[str, ...]

    def __post_init__(self):
        c = np.asarray(self.codes, dtype=np.int32)
        if len(c) and (c.max(initial=-1) >= len(self.levels) or c.min(initial=0) < -1):
            raise ValueError(f"column {self.name!r}: level code out of range")
        c.flags.writeable = False
        object.__setattr__(self, "codes", c)
        object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def n_rows(self) -> int:
        return len(self.codes)

    def is_missing(self) -> np.ndarray:
        return self.codes == -1

    def level_of(self, row: int) -> str | None:
        code = int(self.codes[row])
        return None if code < 0 else self.levels[code]


Column = NumericColumn | CategoricalColumn


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    n_rows: int = field(default=-1)

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if not cols:
            raise EmptyInput("table has no columns")
        n = cols[0].n_rows
        for c in cols:
            if c.n_rows != n:
                raise ValueError(f"column {c.name!r} has {c.n_rows} rows, expected {n}")
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        object.__setattr__(self, "n_rows", n)

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise ColumnNotFound(f"no column named {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def numeric_columns(self) -> list[NumericColumn]:
        return [c for c in self.columns if isinstance(c, NumericColumn)]

    def categorical_columns(self) -> list[CategoricalColumn]:
        return [c for c in self.columns if isinstance(c, CategoricalColumn)]

    def matrix(self, names: list[str] | None = None) -> np.ndarray:
        """Numeric columns stacked as an (n_rows, p) float matrix."""
        if names is None:
            cols = self.numeric_columns()
        else:
            cols = [self.column(n) for n in names]
            for c in cols:
                if not isinstance(c, NumericColumn):
                    raise ColumnNotFound(f"column {c.name!r} is not numeric")
        if not cols:
            raise NoNumericColumns(f"table {self.name!r} has no numeric columns")
        return np.column_stack([c.values for c in cols])

    def take_rows(self, indices: np.ndarray, name: str | None = None) -> "Table":
        idx = np.asarray(indices, dtype=np.int64)
        cols: list[Column] = []
        for c in self.columns:
            if isinstance(c, NumericColumn):
                cols.append(NumericColumn(c.name, c.values[idx]))
            else:
                cols.append(CategoricalColumn(c.name, c.codes[idx], c.levels))
        return Table(name or self.name, tuple(cols))


@dataclass(frozen=True)
class ColumnSummary:
    name: str
    count: int
    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float
    skewness: float


@dataclass(frozen=True)
class AuditReport:
    missing_per_column: dict[str, int]
    duplicate_row_count: int


def load_csv(path, schema_hint: dict[str, str] | None = None, name: str | None = None) -> Table:
    """Read an RFC-4180-style CSV (comma, UTF-8, mandatory header).

    Empty fields are missing. Without a hint a column becomes Numeric only
    when every non-missing token parses as a float; ``schema_hint`` maps
    column names to "numeric" or "categorical" and a failed parse under a
    numeric hint raises ParseFailure.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyInput(f"{path} is empty")
    header = rows[0]
    if len(set(header)) != len(header):
        raise ParseFailure("<header>", 0, f"{path}: duplicate column names in header")
    data = rows[1:]
    if not data:
        raise EmptyInput(f"{path} has a header but no data rows")
    for i, row in enumerate(data):
        if len(row) != len(header):
            raise RaggedRow(i)
    hint = schema_hint or {}

    columns: list[Column] = []
    for j, col_name in enumerate(header):
        tokens = [row[j] for row in data]
        kind = hint.get(col_name)
        if kind not in (None, "numeric", "categorical"):
            raise ParseFailure(col_name, 0, f"unknown schema hint kind {kind!r}")
        if kind != "categorical":
            values = np.full(len(tokens), np.nan)
            ok = True
            for i, tok in enumerate(tokens):
                if tok == "":
                    continue
                try:
                    values[i] = float(tok)
                except ValueError:
                    if kind == "numeric":
                        raise ParseFailure(col_name, i)
                    ok = False
                    break
            if ok:
                columns.append(NumericColumn(col_name, values))
                continue
        levels = tuple(sorted({tok for tok in tokens if tok != ""}))
        index = {lev: k for k, lev in enumerate(levels)}
        codes = np.array([index.get(tok, -1) for tok in tokens], dtype=np.int32)
        columns.append(CategoricalColumn(col_name, codes, levels))
    table_name = name if name is not None else str(path)
    return Table(table_name, tuple(columns))


def _format_numeric(v: float) -> str:
    if math.isnan(v):
        return ""
    if math.isfinite(v) and v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def write_csv(t: Table, path) -> None:
    """Emit the same dialect load_csv reads; missing cells become empty fields."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(t.column_names)
        for i in range(t.n_rows):
            row = []
            for c in t.columns:
                if isinstance(c, NumericColumn):
                    row.append(_format_numeric(float(c.values[i])))
                else:
                    row.append(c.level_of(i) or "")
            writer.writerow(row)


def _row_key(t: Table, i: int) -> tuple:
    key = []
    for c in t.columns:
        if isinstance(c, NumericColumn):
            key.append(np.float64(c.values[i]).tobytes())  # bitwise; NaN == NaN
        else:
            key.append(int(c.codes[i]))
    return tuple(key)


def audit(t: Table) -> AuditReport:
    """Missing counts per column plus duplicate rows beyond the first occurrence."""
    missing = {c.name: int(c.is_missing().sum()) for c in t.columns}
    seen: set[tuple] = set()
    dupes = 0
    for i in range(t.n_rows):
        key = _row_key(t, i)
        if key in seen:
            dupes += 1
        else:
            seen.add(key)
    return AuditReport(missing, dupes)


def quantile_type7(sorted_values: np.ndarray, p: float) -> float:
    """Linear interpolation between closest ranks at index h = (n-1)p."""
    n = len(sorted_values)
    if n == 1:
        return float(sorted_values[0])
    h = (n - 1) * p
    lo = int(math.floor(h))
    frac = h - lo
    if frac == 0.0 or lo + 1 >= n:
        return float(sorted_values[lo])
    return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))


def summarize_values(name: str, values: np.ndarray) -> ColumnSummary:
    """Summary of one numeric vector, missing values excluded."""
    x = np.asarray(values, dtype=np.float64)
    x = x[~np.isnan(x)]
    n = len(x)
    if n == 0:
        return ColumnSummary(name, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    s = np.sort(x)
    mean = float(x.mean())
    std = float(x.std(ddof=1)) if n >= 2 else 0.0
    centered = x - mean
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    skew = m3 / m2**1.5 if (n >= 2 and m2 > 0.0) else 0.0
    return ColumnSummary(
        name,
        n,
        mean,
        std,
        float(s[0]),
        quantile_type7(s, 0.25),
        quantile_type7(s, 0.5),
        quantile_type7(s, 0.75),
        float(s[-1]),
        skew,
    )


def describe(t: Table) -> list[ColumnSummary]:
    """Table VII / Table VIII style panel over the numeric columns.

    std uses the n-1 denominator, quartiles linear interpolation between
    closest ranks, skewness the bias-uncorrected g1 = m3 / m2^(3/2).
    """
    numeric = t.numeric_columns()
    if not numeric:
        raise NoNumericColumns(f"table {t.name!r} has no numeric columns")
    return [summarize_values(c.name, c.values) for c in numeric]
