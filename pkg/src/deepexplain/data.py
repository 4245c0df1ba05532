"""Delimited dataset ingestion, standardisation and sidecar files."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, ZeroVariance


@dataclass(frozen=True)
class StandardizationStats:
    means: np.ndarray
    stds: np.ndarray
    source: str = "computed"

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.stds, dtype=np.float64)
        if means.shape != stds.shape or means.ndim != 1:
            raise DataError("means and stds must be vectors of equal length")
        if not np.all(stds > 0):
            raise DataError("standard deviations must be strictly positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.means.shape[0]:
            raise DataError(f"stats cover {self.means.shape[0]} columns, data has {X.shape[-1]}")
        return (X - self.means) / self.stds


def load_dataset(path, columns=None, delimiter=","):
    """Read a header + numeric rows file.

    ``columns`` selects (and orders) columns by name; other columns are
    ignored.  Returns ``(matrix, names)``.  Empty, ``NA`` or ``NaN`` cells
    are rejected with their data-row number (1-based) and column name.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        if columns is None:
            names = header
        else:
            names = list(columns)
            missing = [c for c in names if c not in header]
            if missing:
                raise DataError(f"{path}: missing columns {missing}")
        idx = [header.index(c) for c in names]
        rows = []
        for r, cells in enumerate(reader, start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise DataError(
                    f"{path}: row {r} has {len(cells)} cells, expected {len(header)}"
                )
            row = []
            for j in idx:
                cell = cells[j].strip()
                try:
                    value = float(cell)
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}: row {r}, column {header[j]!r}: invalid value {cell!r}"
                    )
                row.append(value)
            rows.append(row)
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
    return matrix, names


def standardize(X, stats=None, ddof=0, names=None):
    """Centre and scale columns; returns ``(Z, stats)``.

    Without ``stats`` they are computed from ``X`` with population
    (``ddof=0``) standard deviations.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if stats is None:
        if X.shape[0] == 0:
            raise DataError("cannot compute standardisation stats from no rows")
        means = X.mean(axis=0)
        stds = X.std(axis=0, ddof=ddof)
        for j, s in enumerate(stds):
            if not s > 0:
                raise ZeroVariance(names[j] if names is not None else j)
        stats = StandardizationStats(means, stds, "computed")
    return stats.apply(X), stats


def load_stats(path):
    """Stats sidecar: one ``mean,std`` line per feature, optional header."""
    means, stds = [], []
    with Path(path).open(newline="") as fh:
        for r, cells in enumerate(csv.reader(fh), start=1):
            if not cells:
                continue
            if r == 1 and [c.strip().lower() for c in cells] == ["mean", "std"]:
                continue
            if len(cells) != 2:
                raise DataError(f"{path}: line {r} needs exactly two cells")
            try:
                means.append(float(cells[0]))
                stds.append(float(cells[1]))
            except ValueError:
                raise DataError(f"{path}: line {r} is not numeric") from None
    return StandardizationStats(np.array(means), np.array(stds), "loaded")


def save_stats(stats, path):
    lines = ["mean,std"] + [f"{m!r},{s!r}" for m, s in zip(stats.means.tolist(), stats.stds.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def load_grouping(path):
    """Grouping file: ``feature,group`` lines, optional header."""
    mapping = {}
    with Path(path).open(newline="") as fh:
        for r, cells in enumerate(csv.reader(fh), start=1):
            if not cells:
                continue
            cells = [c.strip() for c in cells]
            if r == 1 and [c.lower() for c in cells] == ["feature", "group"]:
                continue
            if len(cells) != 2:
                raise DataError(f"{path}: line {r} needs exactly two cells")
            feature, group = cells
            if feature in mapping:
                raise DataError(f"{path}: feature {feature!r} listed twice")
            mapping[feature] = group
    return mapping


def check_grouping(mapping, names):
    unknown = sorted(set(mapping) - set(names))
    if unknown:
        raise DataError(f"grouping names unknown features {unknown}")
    missing = [n for n in names if n not in mapping]
    if missing:
        raise DataError(f"grouping does not assign features {missing}")
