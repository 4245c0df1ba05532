"""Plot-ready decomposition tables (one row per observation).

Columns: ``row``, one column per feature group (alphabetical; plain feature
order when ungrouped), ``bias`` (all bias terms cumulated), ``baseline``
(the part of the reference level left undistributed), then the diagnostics
``predicted``, ``reference``, ``pred_minus_ref``, ``reconstruction_error``
and ``grid_points``.  The contribution columns plus ``bias`` and
``baseline`` add up to ``predicted``.
"""

import csv
import io
import json

import numpy as np

from .data import check_grouping

DIAGNOSTICS = ("predicted", "reference", "pred_minus_ref", "reconstruction_error", "grid_points")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def decomposition_table(results, names, grouping=None, row_ids=None):
    """Return ``(columns, rows)`` with numeric cells."""
    names = list(names)
    if grouping is not None:
        check_grouping(grouping, names)
        labels = sorted(set(grouping[n] for n in names))
        members = [[names.index(n) for n in names if grouping[n] == g] for g in labels]
    else:
        labels = names
        members = [[j] for j in range(len(names))]
    columns = ["row", *labels, "bias", "baseline", *DIAGNOSTICS]
    if row_ids is None:
        row_ids = range(len(results))
    rows = []
    for rid, res in zip(row_ids, results):
        contrib = np.asarray(res.feature_contributions, dtype=np.float64)
        bias = res.bias_total
        baseline = res.reference_value
        if res.redistributed:
            contrib = contrib + res.baseline_shares
            bias = bias + res.baseline_bias
            baseline = 0.0
        grouped = [float(contrib[m].sum()) for m in members]
        rows.append([
            int(rid),
            *grouped,
            float(bias),
            float(baseline),
            res.predicted,
            res.reference_value,
            res.predicted - res.reference_value,
            res.reconstruction_error,
            int(res.grid_points_used),
        ])
    return columns, rows


def emit_decomposition(results, names, grouping=None, fmt="csv", row_ids=None):
    """Serialise the decomposition table as CSV or JSON text."""
    columns, rows = decomposition_table(results, names, grouping, row_ids)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        records = [dict(zip(columns, row)) for row in rows]
        return json.dumps({"columns": columns, "rows": records}, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def read_report(text, fmt="csv"):
    """Parse a report back into ``(columns, rows)``."""
    if fmt == "json":
        obj = json.loads(text)
        columns = obj["columns"]
        return columns, [[rec[c] for c in columns] for rec in obj["rows"]]
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = []
    for cells in reader:
        rows.append([
            int(c) if col in ("row", "grid_points") else float(c)
            for col, c in zip(columns, cells)
        ])
    return columns, rows
