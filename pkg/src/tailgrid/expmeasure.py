"""Empirical exponent measures and the metric between them.

A ``PointMeasure`` is a finite collection of piecewise-linear atom
paths carrying a common mass; the interpolated empirical exponent
measure and discretized reference measures both take this form.  The
distance between two such measures on the region D_c (paths whose sup
norm exceeds c) is the Prokhorov-style infimum

    d_c(mu, nu) = inf{eps > 0 : mu(F) <= nu(F^eps) + eps and
                                 nu(F) <= mu(F^eps) + eps
                                 for all closed F in D_c},

with F^eps the sup-norm eps-enlargement.  For purely atomic measures
the worst closed set can be taken to be a subset of atoms: mu(F)
depends only on which atoms F contains, while enlarging F beyond its
atoms can only grow nu(F^eps).  The subset condition

    max over S subseteq atoms(mu) of [mu(S) - nu(S^eps)] <= eps

is decided by the max-flow feasibility computation in ``_maxflow`` on
the bipartite graph linking atoms within sup-distance eps, and the
infimum over eps is found by searching the candidate values where the
feasibility status can change (pairwise atom distances and the
partial-mass deficiency levels).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._maxflow import max_deficiency
from .grids import Grid, PiecewiseLinearPath
from .models import simulate_matrix

__all__ = [
    "PointMeasure",
    "TestSet",
    "ReferenceMeasure",
    "MonteCarloEstimate",
    "nu_hat",
    "restrict",
    "dc_distance",
    "reference_complete_dependence",
    "nu_oracle_monte_carlo",
    "evaluate_atoms",
]

TEST_SET_KINDS = ("min-exceedance", "max-exceedance", "pointwise-exceedance")


@dataclass(frozen=True)
class PointMeasure:
    """Finite atomic measure: atom paths with a common positive mass."""

    atoms: tuple
    weight: float

    def __init__(self, atoms, weight: float):
        if weight <= 0.0 or not np.isfinite(weight):
            raise ValueError("atom weight must be positive and finite")
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "weight", float(weight))

    @property
    def total_mass(self) -> float:
        return self.weight * len(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return f"PointMeasure({len(self.atoms)} atoms, weight {self.weight:g})"


@dataclass(frozen=True)
class TestSet:
    """Exceedance event over a finite set of locations.

    min-exceedance: {z : min over T of z(t) > r}; max-exceedance the
    analogue with max; pointwise-exceedance restricts T to one point.
    """

    __test__ = False  # keep pytest from collecting the class by name

    kind: str
    locations: np.ndarray
    level: float
    name: str = ""

    def __init__(self, kind: str, locations, level: float, name: str = ""):
        if kind not in TEST_SET_KINDS:
            raise ValueError(f"unknown test set kind {kind!r}")
        locs = np.unique(np.asarray(locations, dtype=float).ravel())
        if locs.size == 0:
            raise ValueError("test set needs at least one location")
        if locs[0] < 0.0 or locs[-1] > 1.0:
            raise ValueError("locations must lie in [0, 1]")
        if kind == "pointwise-exceedance" and locs.size != 1:
            raise ValueError("pointwise-exceedance takes a single location")
        if level <= 0.0:
            raise ValueError("exceedance level must be positive")
        locs.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "level", float(level))
        object.__setattr__(self, "name", name)


def evaluate_atoms(atoms, t: np.ndarray) -> np.ndarray:
    """Evaluate every atom at the points t; returns an (n_atoms, len(t)) matrix.

    Atoms sharing one grid object take a vectorized path; mixed grids
    fall back to per-atom interpolation.
    """
    t = np.asarray(t, dtype=float)
    if not atoms:
        return np.empty((0, t.size))
    grid = atoms[0].grid
    if all(a.grid is grid for a in atoms[1:]):
        pts = grid.points
        vals = np.vstack([a.values for a in atoms])
        if pts.size == 1:
            return np.repeat(vals, t.size, axis=1)
        tc = np.clip(t, pts[0], pts[-1])
        hi = np.clip(np.searchsorted(pts, tc, side="left"), 1, pts.size - 1)
        lo = hi - 1
        span = pts[hi] - pts[lo]
        w = (tc - pts[lo]) / span
        return vals[:, lo] * (1.0 - w) + vals[:, hi] * w
    return np.vstack([a(t) for a in atoms])


def _membership(measure: PointMeasure, e: TestSet) -> np.ndarray:
    vals = evaluate_atoms(measure.atoms, e.locations)
    if e.kind == "min-exceedance":
        stat = vals.min(axis=1)
    else:  # max-exceedance and pointwise (single column) coincide
        stat = vals.max(axis=1)
    return stat > e.level


def nu_hat(measure: PointMeasure, e: TestSet) -> float:
    """Measure of the test set: weight times the number of atoms in it."""
    if not measure.atoms:
        return 0.0
    return measure.weight * int(np.count_nonzero(_membership(measure, e)))


def restrict(measure: PointMeasure, c: float) -> PointMeasure:
    """Keep atoms whose sup norm exceeds c; the weight is unchanged."""
    if c <= 0.0:
        raise ValueError("restriction level c must be positive")
    kept = [a for a in measure.atoms if a.sup_norm() > c]
    return PointMeasure(kept, measure.weight)


def _pairwise_sup_distance(mu: PointMeasure, nu: PointMeasure) -> np.ndarray:
    """Exact sup distances between all atom pairs across the two measures.

    Every atom is piecewise linear, so each pairwise difference is
    piecewise linear with breakpoints in the union of all node sets;
    evaluating everything on that union gives exact sup norms.
    """
    pts = [np.array([0.0, 1.0])]
    seen = set()
    for m in (mu, nu):
        for a in m.atoms:
            key = id(a.grid)
            if key not in seen:
                seen.add(key)
                pts.append(a.grid.points)
    t = np.unique(np.concatenate(pts))
    a = evaluate_atoms(mu.atoms, t)
    b = evaluate_atoms(nu.atoms, t)
    out = np.empty((a.shape[0], b.shape[0]))
    chunk = max(1, int(4e6 // max(1, b.shape[0] * t.size)))
    for i in range(0, a.shape[0], chunk):
        out[i:i + chunk] = np.max(
            np.abs(a[i:i + chunk, None, :] - b[None, :, :]), axis=2
        )
    return out


def _deficiency(dist: np.ndarray, eps: float, w_mu: float, w_nu: float) -> float:
    """Worst one-or-other-sided subset deficiency at enlargement radius eps."""
    adj = dist <= eps
    pl, pr = np.nonzero(adj)
    d_mu = max_deficiency(pl, pr, dist.shape[0], dist.shape[1], w_mu, w_nu)
    d_nu = max_deficiency(pr, pl, dist.shape[1], dist.shape[0], w_nu, w_mu)
    return max(d_mu, d_nu, 0.0)


def dc_distance(mu: PointMeasure, nu: PointMeasure, c: float) -> float:
    """Exact Prokhorov-style distance between the measures restricted to D_c.

    The deficiency D(eps) is a nonincreasing step function with jumps
    only at pairwise atom distances, so on each interval between
    consecutive candidate distances the condition D(eps) <= eps holds
    from max(interval start, D) onward.  The first interval admitting a
    feasible eps is located by a gallop-then-bisect search over the
    sorted candidates (the feasibility predicate is monotone), and the
    infimum is max(candidate, D) there.
    """
    mu_r = restrict(mu, c)
    nu_r = restrict(nu, c)
    if len(mu_r) == 0 and len(nu_r) == 0:
        return 0.0
    if len(mu_r) == 0:
        return nu_r.total_mass
    if len(nu_r) == 0:
        return mu_r.total_mass

    dist = _pairwise_sup_distance(mu_r, nu_r)
    cands = np.unique(np.concatenate(([0.0], dist.ravel())))
    m = cands.size
    w_mu, w_nu = mu_r.weight, nu_r.weight

    cache: dict[int, float] = {}

    def deficiency_at(idx: int) -> float:
        if idx not in cache:
            cache[idx] = _deficiency(dist, cands[idx], w_mu, w_nu)
        return cache[idx]

    def feasible(idx: int) -> bool:
        upper = cands[idx + 1] if idx + 1 < m else np.inf
        return deficiency_at(idx) < upper

    # Gallop up from small radii (keeps the adjacency graphs sparse),
    # then bisect for the first feasible interval.
    lo, hi, step = 0, 0, 1
    while not feasible(hi):
        lo = hi + 1
        hi = min(hi + step, m - 1)
        step *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1
    return float(max(cands[lo], deficiency_at(lo)))


@dataclass(frozen=True)
class ReferenceMeasure:
    """Discretized reference exponent measure plus its closed form.

    ``discretization_error`` bounds the gap between set measures of the
    discretization and the continuous reference; distances reported
    against the discretization are meaningful only above it.
    """

    measure: PointMeasure
    c: float
    discretization_error: float

    def closed_form(self, e: TestSet) -> float:
        """nu(E) for the complete-dependence reference restricted to D_c."""
        return 1.0 / max(e.level, self.c)


def reference_complete_dependence(c: float, m: int) -> ReferenceMeasure:
    """Equal-mass quantile discretization of the complete-dependence limit.

    The limit measure concentrates on constant paths with intensity
    r**-2 dr on (c, inf), total mass 1/c.  Splitting into m equal-mass
    cells and placing each cell's mass at its mass-median yields atoms
    at levels c*m/(j - 1/2), j = 1..m, each of weight 1/(c*m).
    """
    if c <= 0.0:
        raise ValueError("restriction level c must be positive")
    if m < 1:
        raise ValueError("need at least one discretization atom")
    grid = Grid([0.0, 1.0])
    levels = c * m / (np.arange(1, m + 1) - 0.5)
    atoms = [PiecewiseLinearPath(grid, [lv, lv]) for lv in levels]
    return ReferenceMeasure(
        measure=PointMeasure(atoms, 1.0 / (c * m)),
        c=c,
        discretization_error=1.0 / (c * m),
    )


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float
    reps: int


def nu_oracle_monte_carlo(model, e: TestSet, u: float, reps: int, seed) -> MonteCarloEstimate:
    """Monte Carlo estimate of nu_u(E) = u * P{xi/u in E} with standard error.

    Simulates the model exactly at the test set's locations and
    standardizes through the exact margins, so the only error is the
    binomial sampling noise reported alongside.
    """
    if reps < 1:
        raise ValueError("need at least one Monte Carlo replicate")
    if u <= 0.0:
        raise ValueError("scaling level u must be positive")
    grid = Grid(e.locations)
    x = simulate_matrix(model, grid, reps, seed)
    surv = np.asarray(model.survival(grid.points, x), dtype=float)
    xi = 1.0 / np.maximum(surv, np.finfo(float).tiny)
    scaled = xi / u
    if e.kind == "min-exceedance":
        stat = scaled.min(axis=1)
    else:
        stat = scaled.max(axis=1)
    p = float(np.count_nonzero(stat > e.level)) / reps
    return MonteCarloEstimate(
        value=u * p,
        std_error=u * float(np.sqrt(p * (1.0 - p) / reps)),
        reps=reps,
    )
