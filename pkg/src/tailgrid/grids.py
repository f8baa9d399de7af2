"""Observation grids, sampled paths, and piecewise-linear interpolation.

A grid is a strictly increasing set of observation points in [0, 1].  A
path sampled on a grid is extended to all of [0, 1] by linear
interpolation between nodes and constant extension outside the node
range.  The exact functionals needed downstream (mesh width, modulus of
continuity, sup distance between two interpolants) are computed from
the breakpoint structure, never by dense sampling.
"""

from __future__ import annotations

from collections import deque

import numpy as np

__all__ = [
    "GridError",
    "Grid",
    "SampledPath",
    "PiecewiseLinearPath",
    "mesh",
    "interpolate",
    "modulus_of_continuity",
    "sup_distance",
]


class GridError(ValueError):
    """Raised when a grid or path fails its construction invariants."""


class Grid:
    """Strictly increasing observation points t_1 < ... < t_j in [0, 1]."""

    __slots__ = ("points",)

    def __init__(self, points) -> None:
        pts = np.array(points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise GridError("grid needs a one-dimensional, nonempty set of points")
        if not np.all(np.isfinite(pts)):
            raise GridError("grid points must be finite")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise GridError("grid points must lie in [0, 1]")
        if pts.size > 1 and not np.all(np.diff(pts) > 0.0):
            raise GridError("grid points must be strictly increasing")
        pts.setflags(write=False)
        self.points = pts

    @classmethod
    def uniform(cls, m: int) -> "Grid":
        """Uniform grid {0, 1/m, ..., 1} with m cells."""
        if m < 1:
            raise GridError("uniform grid needs at least one cell")
        return cls(np.linspace(0.0, 1.0, m + 1))

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def __repr__(self) -> str:
        return f"Grid({self.points.size} points on [{self.points[0]:g}, {self.points[-1]:g}])"


class SampledPath:
    """One path's values observed at the nodes of a grid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values) -> None:
        vals = np.array(values, dtype=float)
        if vals.shape != grid.points.shape:
            raise GridError("values must match the grid length")
        if not np.all(np.isfinite(vals)):
            raise GridError("path values must be finite")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals

    def __repr__(self) -> str:
        return f"SampledPath({len(self.grid)} nodes)"


class PiecewiseLinearPath:
    """Continuous path: affine between grid nodes, constant outside them.

    Evaluation follows the usual convex-combination rule on each cell
    (t_{j-1}, t_j] and holds the boundary node value on [0, t_1] and
    [t_j, 1].  Node values are reproduced exactly.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values) -> None:
        vals = np.array(values, dtype=float)
        if vals.shape != grid.points.shape:
            raise GridError("values must match the grid length")
        if not np.all(np.isfinite(vals)):
            raise GridError("path values must be finite")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals

    def __call__(self, t):
        # np.interp implements exactly this interpolation-with-constant-
        # extension scheme; continuity makes the cell-boundary convention
        # irrelevant to the computed value.
        return np.interp(t, self.grid.points, self.values)

    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes augmented with the interval endpoints 0 and 1."""
        t = self.grid.points
        v = self.values
        if t[0] > 0.0:
            t = np.concatenate(([0.0], t))
            v = np.concatenate(([v[0]], v))
        if t[-1] < 1.0:
            t = np.concatenate((t, [1.0]))
            v = np.concatenate((v, [v[-1]]))
        return t, v

    def sup_norm(self) -> float:
        """Exact sup of |z| over [0, 1]; attained at a node."""
        return float(np.max(np.abs(self.values)))

    def __repr__(self) -> str:
        return f"PiecewiseLinearPath({len(self.grid)} nodes)"


def mesh(grid: Grid) -> float:
    """Maximal grid spacing, padding the endpoints with 0 and 1."""
    padded = np.concatenate(([0.0], grid.points, [1.0]))
    return float(np.max(np.diff(padded)))


def interpolate(z: SampledPath) -> PiecewiseLinearPath:
    """Piecewise-linear extension of a sampled path to all of [0, 1]."""
    return PiecewiseLinearPath(z.grid, z.values)


def _window_range_max(t: np.ndarray, v: np.ndarray, delta: float) -> float:
    """max |v_i - v_j| over index pairs with |t_i - t_j| <= delta.

    Sliding monotone deques over the sorted breakpoints; O(len(t)).
    """
    best = 0.0
    lo = 0
    maxq: deque[int] = deque()
    minq: deque[int] = deque()
    for i in range(t.size):
        while maxq and v[maxq[-1]] <= v[i]:
            maxq.pop()
        maxq.append(i)
        while minq and v[minq[-1]] >= v[i]:
            minq.pop()
        minq.append(i)
        while t[i] - t[lo] > delta:
            if maxq[0] == lo:
                maxq.popleft()
            if minq[0] == lo:
                minq.popleft()
            lo += 1
        spread = v[maxq[0]] - v[minq[0]]
        if spread > best:
            best = spread
    return best


def modulus_of_continuity(z: PiecewiseLinearPath, delta: float) -> float:
    """Largest oscillation sup{|z(x) - z(y)| : |x - y| <= delta}, exactly.

    For a piecewise-linear path the supremum is attained at a pair of
    points where at least one is a breakpoint and the other is either a
    breakpoint too or sits at distance exactly delta; it suffices to
    scan those candidates.
    """
    if not 0.0 <= delta <= 1.0:
        raise GridError("delta must lie in [0, 1]")
    if delta == 0.0:
        return 0.0
    t, v = z.breakpoints()
    best = _window_range_max(t, v, delta)
    right = np.minimum(t + delta, 1.0)
    left = np.maximum(t - delta, 0.0)
    best = max(best, float(np.max(np.abs(v - z(right)))))
    best = max(best, float(np.max(np.abs(v - z(left)))))
    return best


def sup_distance(z1: PiecewiseLinearPath, z2: PiecewiseLinearPath) -> float:
    """Exact sup-norm of z1 - z2 on [0, 1].

    The difference is piecewise linear with breakpoints contained in the
    union of both node sets (plus the interval endpoints), so its
    extrema are attained there.
    """
    t1, _ = z1.breakpoints()
    t2, _ = z2.breakpoints()
    t = np.union1d(t1, t2)
    return float(np.max(np.abs(z1(t) - z2(t))))
