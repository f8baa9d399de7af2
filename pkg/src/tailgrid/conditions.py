"""Numerical checks of the analytic conditions behind the estimators.

The checks evaluate, on a refinement mesh of the observation grid, the
sup-statistics that the consistency theory requires to be of smaller
order than a normalizing sequence lambda_n (1 for consistency,
k**-1/2 for the CLT rate).  Little-o statements are not decidable at a
single n; the verdict here is the stated convention "value below a
configurable fraction of lambda_n", to be combined with trend checks
across an n-schedule by the experiment harness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .grids import Grid, mesh
from .models import simulate_matrix

__all__ = [
    "ConditionReport",
    "MeshRecommendation",
    "check_smoothness",
    "check_M",
    "estimate_S",
    "check_lemma31",
    "recommend_mesh",
]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one condition check at a fixed (n, k)."""

    condition_id: str
    value: float
    lam: float
    threshold: float
    satisfied: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "value": self.value,
            "lambda": self.lam,
            "threshold": self.threshold,
            "satisfied": bool(self.satisfied),
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


class MeshRecommendation(NamedTuple):
    bound: float
    recommended: float


def _lambda(mode: str, k: int) -> float:
    if mode == "one":
        return 1.0
    if mode == "clt":
        return k ** -0.5
    raise ValueError(f"unknown lambda mode {mode!r} (use 'one' or 'clt')")


def _refinement_mesh(grid: Grid, refine: int) -> np.ndarray:
    padded = np.concatenate(([0.0], grid.points, [1.0]))
    pieces = [
        np.linspace(padded[i], padded[i + 1], refine, endpoint=False)
        for i in range(padded.size - 1)
    ]
    pieces.append(np.array([1.0]))
    return np.unique(np.concatenate(pieces))


def _window_extrema(t: np.ndarray, v: np.ndarray, delta: float):
    """Per-index min/max (with argmins/argmaxs) of v over {j : |t_j - t_i| <= delta}."""
    n = t.size
    lo = np.searchsorted(t, t - delta, side="left")
    hi = np.searchsorted(t, t + delta, side="right") - 1
    mins = np.empty(n)
    maxs = np.empty(n)
    amins = np.empty(n, dtype=np.int64)
    amaxs = np.empty(n, dtype=np.int64)
    minq: deque[int] = deque()
    maxq: deque[int] = deque()
    r = 0
    for i in range(n):
        while r <= hi[i]:
            while minq and v[minq[-1]] >= v[r]:
                minq.pop()
            minq.append(r)
            while maxq and v[maxq[-1]] <= v[r]:
                maxq.pop()
            maxq.append(r)
            r += 1
        while minq[0] < lo[i]:
            minq.popleft()
        while maxq[0] < lo[i]:
            maxq.popleft()
        mins[i] = v[minq[0]]
        amins[i] = minq[0]
        maxs[i] = v[maxq[0]]
        amaxs[i] = maxq[0]
    return mins, maxs, amins, amaxs


def check_smoothness(model, grid: Grid, n: int, k: int, lambda_mode: str = "one",
                     fraction: float = 0.1, refine: int = 10):
    """Sup over |s-t| <= delta_n of the three marginal fluctuation statistics.

    Returns three reports: |gamma_s - gamma_t|, |a_s/a_t - 1| and
    |(U_s - U_t)/a_t|, all at tail level n/k, each compared against
    fraction * lambda_n.
    """
    lam = _lambda(lambda_mode, k)
    delta = mesh(grid)
    t = _refinement_mesh(grid, refine)
    u, a, g = model.true_marginals(t, n / k)

    reports = []
    for cid, stat_vals, pair_of in (
        ("gamma-smoothness", *_sym_range_stat(t, g, delta, kind="diff")),
        ("scale-smoothness", *_sym_range_stat(t, a, delta, kind="ratio")),
        ("location-smoothness", *_loc_stat(t, u, a, delta)),
    ):
        value = float(stat_vals)
        reports.append(ConditionReport(
            condition_id=cid,
            value=value,
            lam=lam,
            threshold=fraction * lam,
            satisfied=value <= fraction * lam,
            diagnostics={"pair": pair_of, "delta": delta, "mesh_points": t.size,
                         "tail_level": n / k},
        ))
    return tuple(reports)


def _sym_range_stat(t, v, delta, kind):
    mins, maxs, amins, amaxs = _window_extrema(t, v, delta)
    if kind == "diff":
        up = maxs - v
        down = v - mins
    else:  # multiplicative deviation |v_s/v_t - 1|
        up = maxs / v - 1.0
        down = 1.0 - mins / v
    stat = np.maximum(up, down)
    i = int(np.argmax(stat))
    j = int(amaxs[i] if up[i] >= down[i] else amins[i])
    return float(stat[i]), (float(t[j]), float(t[i]))


def _loc_stat(t, u, a, delta):
    mins, maxs, amins, amaxs = _window_extrema(t, u, delta)
    up = (maxs - u) / a
    down = (u - mins) / a
    stat = np.maximum(up, down)
    i = int(np.argmax(stat))
    j = int(amaxs[i] if up[i] >= down[i] else amins[i])
    return float(stat[i]), (float(t[j]), float(t[i]))


def check_M(model, grid: Grid, n: int, k: int, y_range=(0.5, 2.0),
            lambda_mode: str = "one", fraction: float = 0.1,
            refine: int = 10, n_y: int = 41) -> ConditionReport:
    """Accuracy of the generalized Pareto tail expansion.

    Sup over t (refinement mesh) and y in [y0, y1] of
    |(U_t(y n/k) - U_t(n/k)) / a_t(n/k) - (y**gamma_t - 1)/gamma_t|.
    """
    y0, y1 = y_range
    if not 0.0 < y0 < y1:
        raise ValueError("need 0 < y0 < y1")
    lam = _lambda(lambda_mode, k)
    t = _refinement_mesh(grid, refine)
    ys = np.unique(np.concatenate((np.geomspace(y0, y1, n_y), [1.0])))
    ys = ys[(ys >= y0) & (ys <= y1)]
    u0, a0, g = model.true_marginals(t, n / k)

    best, arg = -1.0, (0.0, 1.0)
    for y in ys:
        uy, _, _ = model.true_marginals(t, y * n / k)
        stat = np.abs((uy - u0) / a0 - (y ** g - 1.0) / g)
        i = int(np.argmax(stat))
        if stat[i] > best:
            best, arg = float(stat[i]), (float(t[i]), float(y))
    return ConditionReport(
        condition_id="gpd-approximation",
        value=best,
        lam=lam,
        threshold=fraction * lam,
        satisfied=best <= fraction * lam,
        diagnostics={"t": arg[0], "y": arg[1], "y_range": (y0, y1), "tail_level": n / k},
    )


def estimate_S(model, grid: Grid, n: int, k: int, tau: float, eps: float,
               lambda_mode: str = "one", reps: int = 2000, seed=None,
               fraction: float = 0.1) -> ConditionReport:
    """Monte Carlo check of the extreme-region path-fluctuation condition.

    Over adjacent grid pairs (s, t), estimates
    P{|X_s - X_t| / a_t > eps * lambda_n, X_t > U_t + tau * a_t}
    and compares the worst pair against fraction * lambda_n * k/n.
    """
    if reps < 1:
        raise ValueError("need at least one Monte Carlo replicate")
    g = np.asarray(model.gamma(grid.points), dtype=float)
    gneg = np.maximum(-g, 0.0)
    tau_max = np.inf if np.all(gneg == 0.0) else 1.0 / float(np.max(gneg))
    if not tau < tau_max:
        raise ValueError(f"tau must be below {tau_max:g}")
    lam = _lambda(lambda_mode, k)

    x = simulate_matrix(model, grid, reps, seed)
    u, a, _ = model.true_marginals(grid.points, n / k)
    diff = np.abs(np.diff(x, axis=1))

    best, arg, best_se = -1.0, (0.0, 0.0), 0.0
    for t_idx, s_idx, d in (
        (slice(1, None), slice(None, -1), diff),   # t is the right node
        (slice(None, -1), slice(1, None), diff),   # t is the left node
    ):
        hit = (d / a[t_idx] > eps * lam) & (x[:, t_idx] > u[t_idx] + tau * a[t_idx])
        p = hit.mean(axis=0)
        i = int(np.argmax(p))
        if p[i] > best:
            best = float(p[i])
            arg = (float(grid.points[s_idx][i]), float(grid.points[t_idx][i]))
            best_se = float(np.sqrt(p[i] * (1.0 - p[i]) / reps))
    target = lam * k / n
    return ConditionReport(
        condition_id="extreme-fluctuation",
        value=best,
        lam=lam,
        threshold=fraction * target,
        satisfied=best <= fraction * target,
        diagnostics={"pair": arg, "std_error": best_se, "target_scale": target,
                     "eps": eps, "tau": tau, "reps": reps},
    )


def check_lemma31(model, grid: Grid, n: int, k: int, tau: float, tau_tilde: float,
                  refine: int = 10, ratio_bound: float = 2.0) -> ConditionReport:
    """Neighbor-pair ordering and scale-ratio consequences of the conditions.

    Verifies on the closed-form margins that
    U_s + tau_tilde * a_s >= U_t + tau * a_t for all |s - t| <= delta_n,
    and that sup a_t/a_s over such pairs stays below ``ratio_bound``.
    """
    if not tau_tilde > tau:
        raise ValueError("tau_tilde must exceed tau")
    t = _refinement_mesh(grid, refine)
    delta = mesh(grid)
    u, a, _ = model.true_marginals(t, n / k)

    phi = u + tau_tilde * a
    psi = u + tau * a
    mins, _, amins, _ = _window_extrema(t, phi, delta)
    margins = mins - psi
    i = int(np.argmin(margins))
    low_margin = float(margins[i])
    low_pair = (float(t[amins[i]]), float(t[i]))

    amin_, amax_, aamin, aamax = _window_extrema(t, a, delta)
    ratio_up = amax_ / a          # a_t/a_s with t the window extremum
    ratio_down = a / amin_
    ratios = np.maximum(ratio_up, ratio_down)
    j = int(np.argmax(ratios))
    ratio = float(ratios[j])
    rj = int(aamax[j] if ratio_up[j] >= ratio_down[j] else aamin[j])
    ratio_pair = (float(t[rj]), float(t[j]))

    return ConditionReport(
        condition_id="neighbor-ordering",
        value=ratio,
        lam=1.0,
        threshold=ratio_bound,
        satisfied=(low_margin >= 0.0) and (ratio <= ratio_bound),
        diagnostics={
            "ordering_min_margin": low_margin,
            "ordering_worst_pair": low_pair,
            "scale_ratio_sup": ratio,
            "scale_ratio_worst_pair": ratio_pair,
            "tau": tau,
            "tau_tilde": tau_tilde,
        },
    )


def recommend_mesh(alpha1: float, alpha2: float, n: int, k: int) -> MeshRecommendation:
    """Grid-rate bound for the CLT-rate smoothness conditions.

    bound = min(k**(-1/(2 alpha2)) * (log n)**(-1/alpha2), k**(-1/alpha1));
    the recommended mesh is one order smaller (factor 1/log n) so the
    little-o requirement has visible headroom at finite n.
    """
    if alpha1 <= 0.0 or alpha2 <= 0.0:
        raise ValueError("Holder exponents must be positive")
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    if n < 3:
        raise ValueError("need n >= 3")
    log_n = np.log(n)
    bound = float(min(k ** (-0.5 / alpha2) * log_n ** (-1.0 / alpha2),
                      k ** (-1.0 / alpha1)))
    return MeshRecommendation(bound=bound, recommended=bound / log_n)
