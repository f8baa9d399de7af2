"""Moment-type marginal tail estimators and their interpolated curves.

At each grid point the estimators use the k+1 largest order statistics
of the observed values: the threshold (the (k+1)-th largest value)
estimates the intermediate quantile, and the first two empirical
moments of the log-excesses over the threshold give the shape and scale
estimates.  Node-wise estimates are then turned into continuous curves
by linear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid, PiecewiseLinearPath, SampledPath, interpolate

__all__ = [
    "DegenerateSampleError",
    "TopOrderStats",
    "TailTriple",
    "MarginCurves",
    "top_order_statistics",
    "moment_estimators",
    "estimate_margins",
    "quantile_estimate",
    "quantile_curves",
    "gamma_asymptotic_variance",
]

# |gamma| below this switches quantile / tail-ratio formulas to their
# analytic log/exp limits, avoiding cancellation in ((.)**-g - 1)/g.
GAMMA_ZERO_TOL = 1e-8


class DegenerateSampleError(ValueError):
    """All top order statistics coincide; the moment estimators are undefined."""


@dataclass(frozen=True)
class TopOrderStats:
    """The k+1 largest sample values: threshold plus the k exceedances."""

    k: int
    threshold: float
    top: np.ndarray  # k values, sorted ascending, all >= threshold


@dataclass(frozen=True)
class TailTriple:
    """Shape, scale and location estimates at one point.

    ``gamma_plus`` is the first log-moment (the Hill part of the shape
    estimate); it is kept because the tail standardization clamp needs
    it separately from ``gamma_hat``.
    """

    gamma_hat: float
    a_hat: float
    u_hat: float
    gamma_plus: float


class MarginCurves:
    """Node-wise tail triples together with their interpolated curves."""

    def __init__(self, grid: Grid, gamma_hat, a_hat, u_hat, gamma_plus) -> None:
        self.grid = grid
        self.gamma_hat = np.asarray(gamma_hat, dtype=float)
        self.a_hat = np.asarray(a_hat, dtype=float)
        self.u_hat = np.asarray(u_hat, dtype=float)
        self.gamma_plus = np.asarray(gamma_plus, dtype=float)
        self.gamma_star = PiecewiseLinearPath(grid, self.gamma_hat)
        self.a_star = PiecewiseLinearPath(grid, self.a_hat)
        self.u_star = PiecewiseLinearPath(grid, self.u_hat)

    @property
    def triples(self) -> list[TailTriple]:
        return [
            TailTriple(g, a, u, gp)
            for g, a, u, gp in zip(self.gamma_hat, self.a_hat, self.u_hat, self.gamma_plus)
        ]

    def triple_at_node(self, j: int) -> TailTriple:
        return TailTriple(
            float(self.gamma_hat[j]),
            float(self.a_hat[j]),
            float(self.u_hat[j]),
            float(self.gamma_plus[j]),
        )

    def __repr__(self) -> str:
        return f"MarginCurves({len(self.grid)} nodes)"


def top_order_statistics(sample, k: int) -> TopOrderStats:
    """Extract the k+1 largest values; the smallest of them is the threshold."""
    x = np.asarray(sample, dtype=float)
    n = x.size
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= n-1, got k={k}, n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    part = np.partition(x, n - k - 1)
    threshold = float(part[n - k - 1])
    top = np.sort(part[n - k:])
    return TopOrderStats(k=k, threshold=threshold, top=top)


def _moment_triple_from_logs(threshold, m1, m2, degenerate):
    """Vectorized core shared by the scalar and columnwise paths."""
    if np.any(degenerate):
        raise DegenerateSampleError("all top order statistics equal; shape estimate undefined")
    gamma_plus = m1
    gamma_minus = 1.0 - 0.5 / (1.0 - m1 * m1 / m2)
    gamma = gamma_plus + gamma_minus
    a = threshold * gamma_plus * (1.0 - gamma_minus)
    return gamma, a, gamma_plus


def moment_estimators(os: TopOrderStats) -> TailTriple:
    """Moment-type (gamma, a, U) estimates from the top order statistics.

    gamma = M1 + 1 - (1/2) / (1 - M1^2 / M2) with M_j the j-th empirical
    moment of log(top / threshold); a = threshold * M1 * (1 - gamma_minus);
    U = threshold.

    Raises
    ------
    DegenerateSampleError
        If all top values coincide (M2 == M1^2), which makes the shape
        correction term blow up.
    ValueError
        If the threshold is not strictly positive (log-excesses need a
        positive baseline; shifting would silently change the estimand).
    """
    if os.threshold <= 0.0:
        raise ValueError("moment estimators require a strictly positive threshold")
    if np.min(os.top) < os.threshold:
        raise ValueError("top order statistics below the threshold")
    logs = np.log(os.top / os.threshold)
    m1 = float(np.mean(logs))
    m2 = float(np.mean(logs * logs))
    degenerate = np.max(os.top) == np.min(os.top)
    gamma, a, gamma_plus = _moment_triple_from_logs(os.threshold, m1, m2, degenerate)
    return TailTriple(float(gamma), float(a), float(os.threshold), float(gamma_plus))


def estimate_margins(samples, k: int) -> MarginCurves:
    """Columnwise moment estimation at every grid point, then interpolation.

    Parameters
    ----------
    samples : list of SampledPath on a common grid, or (Grid, matrix)
        With the matrix form, rows are paths and columns grid points.
    k : number of exceedances above the columnwise threshold.
    """
    grid, x = _as_matrix(samples)
    n, j = x.shape
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= n-1, got k={k}, n={n}")

    part = np.partition(x, n - k - 1, axis=0)
    threshold = part[n - k - 1, :]
    top = part[n - k:, :]

    bad = threshold <= 0.0
    if np.any(bad):
        jj = int(np.argmax(bad))
        raise ValueError(
            f"nonpositive threshold at grid point t={grid.points[jj]:g} (column {jj})"
        )
    degenerate = np.max(top, axis=0) == np.min(top, axis=0)
    if np.any(degenerate):
        jj = int(np.argmax(degenerate))
        raise DegenerateSampleError(
            f"degenerate top sample at grid point t={grid.points[jj]:g} (column {jj})"
        )

    logs = np.log(top / threshold)
    m1 = np.mean(logs, axis=0)
    m2 = np.mean(logs * logs, axis=0)
    gamma, a, gamma_plus = _moment_triple_from_logs(threshold, m1, m2, degenerate)
    return MarginCurves(grid, gamma, a, threshold.copy(), gamma_plus)


def _as_matrix(samples) -> tuple[Grid, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2:
        grid, x = samples
        return grid, np.asarray(x, dtype=float)
    grid = samples[0].grid
    for s in samples[1:]:
        if s.grid is not grid and s.grid != grid:
            raise ValueError("all paths must share a common grid")
    return grid, np.vstack([s.values for s in samples])


def _excess_quantile_factor(gamma, ratio):
    """(ratio**gamma - 1)/gamma with the log limit at gamma ~ 0."""
    gamma = np.asarray(gamma, dtype=float)
    ratio = np.asarray(ratio, dtype=float)
    small = np.abs(gamma) < GAMMA_ZERO_TOL
    g_safe = np.where(small, 1.0, gamma)
    out = np.where(small, np.log(ratio), (ratio ** gamma - 1.0) / g_safe)
    if out.ndim == 0:
        return float(out)
    return out


def quantile_estimate(triple, n: int, k: int, p: float) -> float:
    """Extreme quantile U(1/p) estimate from one tail triple.

    x = U + a * ((n p / k)**(-gamma) - 1) / gamma, with the log limit
    a * log(k/(n p)) when |gamma| is below the zero tolerance.
    """
    if not 0.0 < p <= k / n:
        raise ValueError(f"p must lie in (0, k/n], got p={p}, k/n={k / n:g}")
    if triple.a_hat <= 0.0:
        raise ValueError("quantile estimation requires a positive scale estimate")
    ratio = k / (n * p)
    return float(triple.u_hat + triple.a_hat * _excess_quantile_factor(triple.gamma_hat, ratio))


def quantile_curves(margins: MarginCurves, n: int, k: int, p: float):
    """The two discrete-observation quantile curves.

    Returns a pair ``(x_star, x_interp)``: ``x_star(t)`` plugs the
    interpolated triple at t into the quantile formula (not piecewise
    linear), while ``x_interp`` interpolates the node-wise quantile
    estimates.  The two coincide at grid nodes.
    """
    if not 0.0 < p <= k / n:
        raise ValueError(f"p must lie in (0, k/n], got p={p}, k/n={k / n:g}")
    if np.any(margins.a_hat <= 0.0):
        raise ValueError("quantile estimation requires positive scale estimates at all nodes")
    ratio = k / (n * p)

    def x_star(t):
        g = margins.gamma_star(t)
        a = margins.a_star(t)
        u = margins.u_star(t)
        return u + a * _excess_quantile_factor(g, ratio)

    node_q = margins.u_hat + margins.a_hat * _excess_quantile_factor(margins.gamma_hat, ratio)
    x_interp = interpolate(SampledPath(margins.grid, node_q))
    return x_star, x_interp


def gamma_asymptotic_variance(gamma) -> np.ndarray:
    """Asymptotic variance of sqrt(k)(gamma_hat - gamma) for the moment estimator.

    1 + gamma^2 for gamma >= 0; the standard rational expression in
    gamma for gamma < 0.  Used for reported standard errors only.
    """
    g = np.asarray(gamma, dtype=float)
    pos = 1.0 + g * g
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = (
            (1.0 - g) ** 2
            * (1.0 - 2.0 * g)
            * (6.0 * g * g - g + 1.0)
            / ((1.0 - 3.0 * g) * (1.0 - 4.0 * g))
        )
    return np.where(g >= 0.0, pos, neg)
