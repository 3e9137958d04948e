"""Observation tables and per-variable quantile trimming.

Trimming removes, for every variable, the rows falling strictly outside the
empirical alpha/p and 1 - alpha/p quantiles; a row trimmed for one variable
is dropped for all variables. Everything downstream runs on the retained
rows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Malformed input table or invalid trimming request."""


@dataclass(frozen=True)
class DataMatrix:
    """An n x p table of finite observations with unique column names."""

    values: np.ndarray
    names: tuple[str, ...]
    response: str | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        if values.ndim != 2:
            raise DataError("data must be a 2-d matrix")
        n, p = values.shape
        if n < 10:
            raise DataError(f"need at least 10 rows, got {n}")
        if p < 2:
            raise DataError(f"need at least 2 columns, got {p}")
        if len(self.names) != p:
            raise DataError("one name per column required")
        if len(set(self.names)) != p:
            raise DataError("column names must be unique")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {bad[0] + 1}, column {self.names[bad[1]]}")
        if self.response is not None and self.response not in self.names:
            raise DataError(f"unknown response column {self.response!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def response_index(self) -> int:
        if self.response is None:
            raise DataError("no response column designated")
        return self.names.index(self.response)

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]


@dataclass(frozen=True)
class TrimmedData:
    """Retained row indices plus the per-variable trim bounds."""

    data: DataMatrix
    rows: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    @property
    def n_retained(self) -> int:
        return len(self.rows)

    @property
    def values(self) -> np.ndarray:
        """Retained rows of the source matrix, original column order."""
        return self.data.values[self.rows]


def load_table(path, response: str, delimiter: str = ",") -> DataMatrix:
    """Read a delimited text table with one header row.

    Parameters
    ----------
    path : str or Path
        File to read. UTF-8, one header row, all body cells numeric.
    response : str
        Name of the column to designate as the response.
    delimiter : str
        Cell separator, comma by default.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty input file: {path}") from None
        names = [h.strip() for h in header]
        if len(set(names)) != len(names):
            dupes = sorted({x for x in names if names.count(x) > 1})
            raise DataError(f"duplicate header name(s): {', '.join(dupes)}")
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(names):
                raise DataError(f"row {lineno} has {len(cells)} cells, expected {len(names)}")
            parsed = []
            for name, cell in zip(names, cells):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"non-numeric cell {cell.strip()!r} at row {lineno}, column {name}"
                    ) from None
            rows.append(parsed)
        if not rows:
            raise DataError(f"no data rows in {path}")
    return DataMatrix(np.asarray(rows, dtype=float), tuple(names), response=response)


def _order_stat_quantile(sorted_col: np.ndarray, q: float) -> float:
    """Empirical quantile x_(ceil(q*n)), 1-indexed, clamped to the sample."""
    n = len(sorted_col)
    k = int(np.ceil(q * n))
    k = min(max(k, 1), n)
    return float(sorted_col[k - 1])


def trim(data: DataMatrix, alpha: float) -> TrimmedData:
    """Drop rows with any coordinate outside its column's trim bounds.

    For each variable the bounds are the empirical alpha/p and 1 - alpha/p
    quantiles; rows exactly on a bound are retained.
    """
    if not 0.0 <= alpha < 0.25:
        raise DataError(f"trim level must lie in [0, 0.25), got {alpha}")
    q = alpha / data.p
    lower = np.empty(data.p)
    upper = np.empty(data.p)
    for j in range(data.p):
        col = np.sort(data.values[:, j])
        lower[j] = _order_stat_quantile(col, q)
        upper[j] = _order_stat_quantile(col, 1.0 - q)
    keep = np.all((data.values >= lower) & (data.values <= upper), axis=1)
    rows = np.nonzero(keep)[0]
    if len(rows) < 10:
        raise DataError(f"only {len(rows)} rows survive trimming, need at least 10")
    return TrimmedData(data=data, rows=rows, lower=lower, upper=upper, alpha=alpha)


def max_spacing_diagnostic(values) -> float:
    """Largest gap between consecutive sorted values.

    Used as an empirical check that the retained order statistics fill their
    range densely (gap * N stays bounded).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise DataError("need at least 2 values for the spacing diagnostic")
    gaps = np.diff(arr)
    if np.any(gaps < 0):
        raise DataError("values must be sorted ascending")
    return float(gaps.max())
