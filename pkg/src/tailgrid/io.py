"""Serialization: paths as CSV rows, grids and test sets as JSON."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .expmeasure import TestSet
from .grids import Grid, SampledPath

__all__ = [
    "save_grid_json",
    "load_grid_json",
    "save_paths_csv",
    "load_paths_csv",
    "load_test_sets_json",
]

_PATHS_HEADER = "path_id,t,value"


def save_grid_json(grid: Grid, path) -> None:
    Path(path).write_text(json.dumps(grid.points.tolist()) + "\n")


def load_grid_json(path) -> Grid:
    return Grid(json.loads(Path(path).read_text()))


def save_paths_csv(path, grid: Grid, values) -> None:
    """Write paths as rows (path_id, t, value), one row per observation.

    ``values`` is either an (n, j) matrix or a list of SampledPath on
    the given grid.
    """
    if isinstance(values, (list, tuple)) and values and isinstance(values[0], SampledPath):
        values = np.vstack([p.values for p in values])
    x = np.asarray(values, dtype=float)
    n, j = x.shape
    if j != len(grid):
        raise ValueError("value columns must match the grid length")
    ids = np.repeat(np.arange(n), j)
    ts = np.tile(grid.points, n)
    out = np.column_stack((ids, ts, x.ravel()))
    np.savetxt(path, out, fmt=["%d", "%.17g", "%.17g"], delimiter=",",
               header=_PATHS_HEADER, comments="")


def load_paths_csv(path) -> tuple[Grid, np.ndarray]:
    """Read paths written by :func:`save_paths_csv`; all paths must share a grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError("paths CSV must have columns path_id,t,value")
    ids = data[:, 0].astype(np.int64)
    order = np.lexsort((data[:, 1], ids))
    data = data[order]
    ids = ids[order]
    uniq, counts = np.unique(ids, return_counts=True)
    if np.min(counts) != np.max(counts):
        raise ValueError("paths have differing numbers of observations")
    j = int(counts[0])
    ts = data[:, 1].reshape(-1, j)
    if not np.all(ts == ts[0]):
        raise ValueError("paths are not observed on a common grid")
    grid = Grid(ts[0])
    return grid, data[:, 2].reshape(-1, j).copy()


def load_test_sets_json(path) -> list[tuple[str, TestSet]]:
    """Read test sets: a JSON list of {id, kind, locations, level} records."""
    records = json.loads(Path(path).read_text())
    out = []
    for i, rec in enumerate(records):
        name = str(rec.get("id", f"set{i}"))
        out.append((name, TestSet(rec["kind"], rec["locations"], float(rec["level"]),
                                  name=name)))
    return out
