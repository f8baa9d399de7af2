"""Marginal standardization of observed paths.

``xi_true`` maps observations through the exact marginal tails,
xi_t = 1 / P{X_t > x}, giving standard-Pareto-like margins.
``xi_hat`` replaces the exact tail with its estimated generalized
Pareto form built from the node-wise tail triples.  ``scaled_atoms``
multiplies standardized paths by k/n and interpolates, producing the
atoms of the interpolated empirical exponent measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid, PiecewiseLinearPath, SampledPath, interpolate
from .margins import GAMMA_ZERO_TOL, MarginCurves

__all__ = [
    "StandardizationError",
    "StandardizedPath",
    "xi_true",
    "xi_hat",
    "scaled_atoms",
]

# Relative floor for clamped standardized values, in units of n/k; keeps
# atoms strictly positive without ever entering any exceedance region.
CLAMP_FLOOR = 1e-12


class StandardizationError(ValueError):
    """Raised when a path value falls outside the usable tail range."""


@dataclass(frozen=True)
class StandardizedPath:
    """A standardized path on a grid; ``scaled`` marks multiplication by k/n."""

    grid: Grid
    values: np.ndarray
    scaled: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.points.shape:
            raise ValueError("values must match the grid length")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise StandardizationError("standardized values must be finite and positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def xi_true(model, path: SampledPath) -> StandardizedPath:
    """Standardize through the model's exact margins: 1 / P{X_t > x}."""
    surv = np.asarray(model.survival(path.grid.points, path.values), dtype=float)
    if np.any(surv <= 0.0):
        j = int(np.argmax(surv <= 0.0))
        raise StandardizationError(
            f"observation at t={path.grid.points[j]:g} sits at the support boundary (F=1)"
        )
    return StandardizedPath(path.grid, 1.0 / surv, scaled=False)


def xi_hat(margins: MarginCurves, path: SampledPath, n: int, k: int) -> StandardizedPath:
    """Standardize through the estimated GPD tail at each grid node.

    xi = (n/k) * (1 + gamma * max((x - u)/a, -1/gamma_plus)) ** (1/gamma),
    with the exponential limit at gamma ~ 0.  Node estimates are used
    directly (interpolation happens later, on the scaled path).  Values
    driven to zero by the clamp are floored at CLAMP_FLOOR * n/k.
    """
    if path.grid != margins.grid:
        raise ValueError("path and margin curves must share a grid")
    if np.any(margins.a_hat <= 0.0):
        raise ValueError("standardization requires positive scale estimates")
    ratio = n / k
    g = margins.gamma_hat
    gp = margins.gamma_plus
    w = (path.values - margins.u_hat) / margins.a_hat
    with np.errstate(divide="ignore"):
        clamp = np.where(gp > 0.0, -1.0 / gp, -np.inf)
    inner = np.maximum(w, clamp)
    base = 1.0 + g * inner

    out = np.empty_like(w)
    floor = CLAMP_FLOOR * ratio
    small = np.abs(g) < GAMMA_ZERO_TOL
    neg = (g <= -GAMMA_ZERO_TOL)
    pos = ~(small | neg)

    if np.any(neg) and np.any(base[neg] <= 0.0):
        j = int(np.argmax(neg & (base <= 0.0)))
        raise StandardizationError(
            f"observation at t={path.grid.points[j]:g} beyond the estimated upper endpoint"
        )
    out[neg] = ratio * base[neg] ** (1.0 / g[neg])
    out[small] = ratio * np.exp(inner[small])
    safe = np.where(pos & (base > 0.0), base, 1.0)
    out[pos] = np.where(
        base[pos] > 0.0,
        ratio * safe[pos] ** (1.0 / np.where(pos, g, 1.0)[pos]),
        floor,
    )
    out = np.maximum(out, floor)
    return StandardizedPath(path.grid, out, scaled=False)


def scaled_atoms(paths: list[StandardizedPath], n: int, k: int) -> list[PiecewiseLinearPath]:
    """Multiply each standardized path by k/n and interpolate."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    scale = k / n
    atoms = []
    for p in paths:
        if p.scaled:
            raise ValueError("paths are already scaled by k/n")
        atoms.append(interpolate(SampledPath(p.grid, scale * p.values)))
    return atoms
