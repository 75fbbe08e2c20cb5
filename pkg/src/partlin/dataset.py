"""Tabular container for one observed series and CSV round tripping.

A dataset is the triple (response, regressor block, scalar covariate)
with column labels carried along for reporting.  Serialization uses 17
significant digits so that write followed by load reproduces every
float bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ParseError, SchemaError

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class TimeSeriesDataset:
    """One observed series: response ``y``, regressors ``x``, covariate ``v``.

    ``y`` and ``v`` have shape (n,), ``x`` has shape (n, d) with d >= 1.
    Arrays are stored read only; operating on a dataset never mutates it.
    """

    y: np.ndarray
    x: np.ndarray
    v: np.ndarray
    y_label: str = "y"
    x_labels: tuple[str, ...] = field(default=())
    v_label: str = "v"

    def __post_init__(self) -> None:
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        x = np.asarray(self.x, dtype=float)
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim != 1 or v.ndim != 1 or x.ndim != 2:
            raise ParameterError("y and v must be 1-d, x must be 2-d")
        n = y.size
        if n < 1:
            raise ParameterError("dataset needs at least one observation")
        if x.shape[0] != n or v.size != n:
            raise ParameterError(
                f"length mismatch: y has {n}, x has {x.shape[0]}, v has {v.size}"
            )
        if x.shape[1] < 1:
            raise ParameterError("x needs at least one column")
        labels = self.x_labels or tuple(f"x{j + 1}" for j in range(x.shape[1]))
        if len(labels) != x.shape[1]:
            raise ParameterError(
                f"{len(labels)} regressor labels for {x.shape[1]} columns"
            )
        for arr in (y, x, v):
            arr.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "x_labels", tuple(labels))

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" or "warning"
    column: str
    message: str
    index: int | None = None


def _resolve(col: int | str, names: list[str] | None, path: str) -> int:
    """Map a column selector (name or 0-based position) to a position."""
    if isinstance(col, int):
        width = len(names) if names is not None else None
        if col < 0 or (width is not None and col >= width):
            raise SchemaError(f"{path}: no column at position {col}")
        return col
    if names is None:
        raise SchemaError(
            f"{path}: column {col!r} requested by name but the file was "
            "read without a header row"
        )
    try:
        return names.index(col)
    except ValueError:
        raise SchemaError(
            f"{path}: column {col!r} not found; header has {names}"
        ) from None


def load_csv(
    path: str,
    y_col: int | str = "y",
    x_cols: tuple[int | str, ...] = ("x1",),
    v_col: int | str = "v",
    header: bool = True,
) -> TimeSeriesDataset:
    """Read a dataset from a CSV file.

    Columns are selected by header name, or by 0-based position when
    ``header`` is false.  Any cell that does not parse as a float raises
    :class:`ParseError` naming the column and the 1-based data row.
    """
    if not x_cols:
        raise ParameterError("x_cols must name at least one column")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    names: list[str] | None = None
    if header:
        if not rows:
            raise SchemaError(f"{path}: empty file")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    wanted = [y_col, *x_cols, v_col]
    positions = [_resolve(c, names, path) for c in wanted]
    labels = [
        names[p] if names is not None else f"col{p}" for p in positions
    ]

    data = np.empty((len(rows), len(positions)))
    for i, row in enumerate(rows):
        for j, pos in enumerate(positions):
            if pos >= len(row):
                raise ParseError(
                    f"{path}: data row {i + 1} has only {len(row)} fields"
                )
            cell = row[pos].strip()
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: cannot parse {cell!r} in column "
                    f"{labels[j]!r} at data row {i + 1}"
                ) from None

    k = len(x_cols)
    return TimeSeriesDataset(
        y=data[:, 0],
        x=data[:, 1 : 1 + k],
        v=data[:, 1 + k],
        y_label=labels[0],
        x_labels=tuple(labels[1 : 1 + k]),
        v_label=labels[1 + k],
    )


def write_csv(path: str, ds: TimeSeriesDataset) -> None:
    """Write ``ds`` with a header row and 17 significant digit floats."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([ds.y_label, *ds.x_labels, ds.v_label])
        for i in range(ds.n):
            cells = [ds.y[i], *ds.x[i], ds.v[i]]
            w.writerow([_FLOAT_FMT % c for c in cells])


def validate(ds: TimeSeriesDataset) -> list[ValidationIssue]:
    """Check a dataset and return findings without modifying it.

    Non finite cells are errors (reported with the first offending row
    index); constant columns are warnings, since a constant regressor
    makes the detrended design singular and a constant covariate makes
    every kernel window degenerate.
    """
    issues: list[ValidationIssue] = []
    columns = [(ds.y_label, ds.y)]
    columns += [(lab, ds.x[:, j]) for j, lab in enumerate(ds.x_labels)]
    columns.append((ds.v_label, ds.v))
    for label, col in columns:
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            issues.append(
                ValidationIssue(
                    severity="error",
                    column=label,
                    message=(
                        f"{bad.size} non-finite value(s), first at row "
                        f"{int(bad[0]) + 1}"
                    ),
                    index=int(bad[0]),
                )
            )
        elif ds.n > 1 and np.all(col == col[0]):
            issues.append(
                ValidationIssue(
                    severity="warning",
                    column=label,
                    message="column is constant",
                )
            )
    return issues
