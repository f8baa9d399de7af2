"""Synthetic process families with closed-form marginal tail functions.

Three families are provided, each with an exact sampler and exact (or
documented-asymptotic) marginal functions U_t(y), a_t(y), gamma_t:

* ``ParetoPower``: X_t = V**gamma_t for a single standard Pareto draw V
  per path.  Tails are exactly generalized Pareto, so these paths are
  the workhorse for algebraic-identity checks.
* ``ExpGaussian``: X_t = Y**gamma_t * exp(Z_t) with Y standard Pareto
  and Z a centered Gaussian path, independent.  The marginal survival
  function is exact; U_t and a_t use the standard power-law asymptotic
  with constant c_t = exp(sigma_t^2 / (2 gamma_t)).
* ``CompleteDependenceFrechet``: X_t = Z0**gamma_t for one unit Frechet
  draw Z0 per path; the max-stable limit concentrates on constant
  paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .grids import Grid, GridError, SampledPath

__all__ = [
    "GammaCurve",
    "CovarianceSpec",
    "ParetoPower",
    "ExpGaussian",
    "CompleteDependenceFrechet",
    "simulate",
    "simulate_matrix",
    "true_marginals",
    "counterexample_error",
    "model_from_dict",
]


class GammaCurve:
    """A shape-parameter curve t -> gamma_t on [0, 1], callable and vectorized.

    Three forms: constant; a Holder-smooth power form
    base + scale * t**exponent (Holder constant `scale`, exponent
    `exponent` for exponent <= 1); and a rough zigzag that is piecewise
    linear between grid nodes and cell midpoints, dipping by
    kappa / log(n/k) at each midpoint.  The zigzag targets exactly the
    regime where interpolated location estimates lose uniform
    consistency: the dip size is o(1) but not o(1/log(n/k)) unless
    kappa -> 0.
    """

    def __init__(self, kind: str, knots_t: np.ndarray, knots_v: np.ndarray, params: dict):
        self.kind = kind
        self._t = np.asarray(knots_t, dtype=float)
        self._v = np.asarray(knots_v, dtype=float)
        self.params = params

    @classmethod
    def constant(cls, value: float) -> "GammaCurve":
        return cls("constant", np.array([0.0, 1.0]), np.array([value, value]), {"value": value})

    @classmethod
    def holder(cls, base: float, scale: float, exponent: float) -> "GammaCurve":
        if exponent <= 0.0:
            raise ValueError("holder exponent must be positive")
        params = {"base": base, "scale": scale, "exponent": exponent}
        return cls("holder", np.empty(0), np.empty(0), params)

    @classmethod
    def rough(cls, grid: Grid, base: float, kappa: float, n: int, k: int) -> "GammaCurve":
        """Zigzag curve with value ``base`` at grid nodes and
        ``base - kappa/log(n/k)`` at cell midpoints."""
        if not 1 <= k < n:
            raise ValueError("rough curve needs 1 <= k < n")
        jump = kappa / np.log(n / k)
        pts = grid.points
        mids = 0.5 * (pts[:-1] + pts[1:])
        knots_t = np.empty(pts.size + mids.size)
        knots_t[0::2] = pts
        knots_t[1::2] = mids
        knots_v = np.empty_like(knots_t)
        knots_v[0::2] = base
        knots_v[1::2] = base - jump
        if np.any(knots_v <= 0.0):
            raise ValueError(
                f"rough curve dips to {base - jump:g} <= 0; reduce kappa or raise base"
            )
        params = {"base": base, "kappa": kappa, "jump": jump, "n": n, "k": k}
        return cls("rough", knots_t, knots_v, params)

    def __call__(self, t):
        if self.kind == "holder":
            t = np.asarray(t, dtype=float)
            out = self.params["base"] + self.params["scale"] * t ** self.params["exponent"]
            return float(out) if out.ndim == 0 else out
        out = np.interp(t, self._t, self._v)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class CovarianceSpec:
    """Stationary-in-law covariance families for the Gaussian factor.

    ``exponential``: k(s,t) = sigma2 * exp(-|s-t|/ell), increment
    exponent alpha1 = 1.  ``fbm``: fractional-Brownian-type
    k(s,t) = sigma2/2 (s^2H + t^2H - |s-t|^2H), alpha1 = 2H.
    """

    family: str
    sigma2: float
    ell: float = 0.2
    hurst: float = 0.5

    def __post_init__(self):
        if self.family not in ("exponential", "fbm"):
            raise ValueError(f"unknown covariance family {self.family!r}")
        if self.sigma2 < 0.0:
            raise ValueError("sigma2 must be nonnegative")
        if self.family == "exponential" and self.ell <= 0.0:
            raise ValueError("exponential covariance needs ell > 0")
        if self.family == "fbm" and not 0.0 < self.hurst <= 1.0:
            raise ValueError("fbm covariance needs 0 < hurst <= 1")

    def matrix(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            return self.sigma2 * np.exp(-np.abs(t[:, None] - t[None, :]) / self.ell)
        h2 = 2.0 * self.hurst
        return 0.5 * self.sigma2 * (
            t[:, None] ** h2 + t[None, :] ** h2 - np.abs(t[:, None] - t[None, :]) ** h2
        )

    def variance(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "exponential":
            out = np.full(t.shape, self.sigma2)
        else:
            out = self.sigma2 * t ** (2.0 * self.hurst)
        return float(out) if out.ndim == 0 else out

    def increment_variance(self, s, t):
        """Exact E[(Z_s - Z_t)^2]."""
        if self.family == "exponential":
            return 2.0 * self.sigma2 * (1.0 - np.exp(-np.abs(np.subtract(s, t)) / self.ell))
        return self.sigma2 * np.abs(np.subtract(s, t)) ** (2.0 * self.hurst)

    @property
    def alpha1(self) -> float:
        return 1.0 if self.family == "exponential" else 2.0 * self.hurst

    @property
    def holder_c1(self) -> float:
        """Constant C1 with E[(Z_s - Z_t)^2] <= C1 |s-t|**alpha1."""
        return 2.0 * self.sigma2 / self.ell if self.family == "exponential" else self.sigma2


def _pareto(rng: np.random.Generator, size) -> np.ndarray:
    # Inverse transform 1/U; U floored away from 0 so draws stay finite.
    u = np.maximum(rng.random(size), np.finfo(float).tiny)
    return 1.0 / u


def _frechet(rng: np.random.Generator, size) -> np.ndarray:
    # Inverse transform -1/log(U).
    u = np.maximum(rng.random(size), np.finfo(float).tiny)
    return -1.0 / np.log(u)


class ParetoPower:
    """X_t = V**gamma_t with V standard Pareto; tails are exactly GPD."""

    kind = "pareto-power"

    def __init__(self, gamma: GammaCurve) -> None:
        self.gamma = gamma

    def survival(self, t, x):
        """Exact P{X_t > x}, vectorized over broadcastable t, x."""
        g = np.asarray(self.gamma(t), dtype=float)
        x = np.asarray(x, dtype=float)
        if np.any(g <= 0.0):
            raise ValueError("power model needs gamma_t > 0")
        out = np.where(x >= 1.0, np.maximum(x, 1.0) ** (-1.0 / g), 1.0)
        return float(out) if out.ndim == 0 else out

    def true_marginals(self, t, y):
        g = np.asarray(self.gamma(t), dtype=float)
        u = y ** g
        return u, g * u, g

    def sample_matrix(self, grid: Grid, n: int, rng: np.random.Generator) -> np.ndarray:
        v = _pareto(rng, n)
        return v[:, None] ** self.gamma(grid.points)[None, :]


class ExpGaussian:
    """X_t = Y**gamma_t * exp(Z_t); Y standard Pareto, Z centered Gaussian."""

    kind = "exp-gaussian"

    def __init__(self, gamma: GammaCurve, covariance: CovarianceSpec) -> None:
        self.gamma = gamma
        self.covariance = covariance

    def _check_gamma(self, g):
        if np.any(np.asarray(g) <= 0.0):
            raise ValueError("exp-Gaussian model needs gamma_t > 0")

    def survival(self, t, x):
        """Exact P{X_t > x} by conditioning on the Gaussian factor."""
        g = np.asarray(self.gamma(t), dtype=float)
        self._check_gamma(g)
        x = np.asarray(x, dtype=float)
        s2 = np.asarray(self.covariance.variance(t), dtype=float)
        g, s2, x = np.broadcast_arrays(g, s2, x)
        out = np.empty(x.shape)
        zero = s2 == 0.0
        xz = np.maximum(x, np.finfo(float).tiny)
        out[zero] = np.where(x[zero] >= 1.0, xz[zero] ** (-1.0 / g[zero]), 1.0)
        nz = ~zero
        if np.any(nz):
            s = np.sqrt(s2[nz])
            lx = np.log(xz[nz])
            body = xz[nz] ** (-1.0 / g[nz]) * np.exp(s2[nz] / (2.0 * g[nz] ** 2)) * ndtr(
                lx / s - s / g[nz]
            )
            out[nz] = np.where(x[nz] > 0.0, body + ndtr(-lx / s), 1.0)
        out = np.minimum(out, 1.0)
        return float(out) if out.ndim == 0 else out

    def true_marginals(self, t, y):
        """Asymptotic closed forms U_t(y) = c_t y**gamma_t, a_t = gamma_t U_t.

        The neglected term decays faster than any power of y; the
        residual is what condition reports quantify numerically.
        """
        g = np.asarray(self.gamma(t), dtype=float)
        self._check_gamma(g)
        s2 = np.asarray(self.covariance.variance(t), dtype=float)
        c = np.exp(s2 / (2.0 * g))
        u = c * y ** g
        return u, g * u, g

    def sample_matrix(self, grid: Grid, n: int, rng: np.random.Generator) -> np.ndarray:
        g = self.gamma(grid.points)
        self._check_gamma(g)
        y = _pareto(rng, n)
        z = self._sample_gaussian(grid.points, n, rng)
        return y[:, None] ** g[None, :] * np.exp(z)

    def _sample_gaussian(self, t: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.covariance.sigma2 == 0.0:
            return np.zeros((n, t.size))
        if self.covariance.family == "exponential":
            # The exponential-kernel path is Markov; the node-by-node
            # autoregression below draws from exactly the same joint
            # normal law as a Cholesky factor would, in O(n * j).
            sigma2 = self.covariance.sigma2
            rho = np.exp(-np.diff(t) / self.covariance.ell)
            z = np.empty((n, t.size))
            z[:, 0] = np.sqrt(sigma2) * rng.standard_normal(n)
            innov = rng.standard_normal((n, t.size - 1))
            for j in range(1, t.size):
                r = rho[j - 1]
                z[:, j] = r * z[:, j - 1] + np.sqrt(sigma2 * (1.0 - r * r)) * innov[:, j - 1]
            return z
        chol = _jittered_cholesky(self.covariance.matrix(t))
        return rng.standard_normal((n, t.size)) @ chol.T


class CompleteDependenceFrechet:
    """X_t = Z0**gamma_t for one unit Frechet draw Z0 per path."""

    kind = "complete-dependence"

    def __init__(self, gamma: GammaCurve) -> None:
        self.gamma = gamma

    def survival(self, t, x):
        g = np.asarray(self.gamma(t), dtype=float)
        if np.any(g <= 0.0):
            raise ValueError("Frechet power model needs gamma_t > 0")
        x = np.asarray(x, dtype=float)
        xz = np.maximum(x, np.finfo(float).tiny)
        out = np.where(x > 0.0, -np.expm1(-(xz ** (-1.0 / g))), 1.0)
        return float(out) if out.ndim == 0 else out

    def true_marginals(self, t, y):
        """U_t(y) = (-log(1 - 1/y))**(-gamma_t); a_t = gamma_t U_t.

        The scale choice matches the power-tail asymptotics of the
        Frechet margin (U_t(y) ~ y**gamma_t as y grows).
        """
        g = np.asarray(self.gamma(t), dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(y <= 1.0):
            raise ValueError("true_marginals needs y > 1")
        u = (-np.log1p(-1.0 / y)) ** (-g)
        return u, g * u, g

    def sample_matrix(self, grid: Grid, n: int, rng: np.random.Generator) -> np.ndarray:
        z0 = _frechet(rng, n)
        return z0[:, None] ** self.gamma(grid.points)[None, :]


def _jittered_cholesky(cov: np.ndarray) -> np.ndarray:
    """Cholesky factor with escalating diagonal jitter.

    Numerically semidefinite matrices (fbm kernels on fine grids) get
    jitter 1e-10 * trace/m, escalated tenfold up to 1e-6 * trace/m.
    """
    m = cov.shape[0]
    scale = np.trace(cov) / m
    if scale <= 0.0:
        scale = 1.0
    factor = 1e-10
    while factor <= 1e-6:
        try:
            return np.linalg.cholesky(cov + factor * scale * np.eye(m))
        except np.linalg.LinAlgError:
            factor *= 10.0
    raise np.linalg.LinAlgError("covariance not factorizable even with maximal jitter")


def simulate_matrix(model, grid: Grid, n: int, seed) -> np.ndarray:
    """n iid paths sampled at the grid nodes, as an (n, j) matrix."""
    if n < 1:
        raise ValueError("need n >= 1 paths")
    rng = np.random.default_rng(seed)
    return model.sample_matrix(grid, n, rng)


def simulate(model, grid: Grid, n: int, seed) -> list[SampledPath]:
    """n iid paths from the model, deterministic given the seed."""
    x = simulate_matrix(model, grid, n, seed)
    return [SampledPath(grid, row) for row in x]


def true_marginals(model, t, y):
    """Closed-form (U_t(y), a_t(y), gamma_t) for the model's margins."""
    if np.any(np.asarray(y) <= 1.0):
        raise ValueError("true_marginals needs y > 1")
    return model.true_marginals(t, y)


def counterexample_error(model: ParetoPower, grid: Grid, n: int, k: int, t: float,
                         v_threshold: float) -> float:
    """Closed-form standardized error of the interpolated location estimate.

    For power-model paths the interpolated threshold estimate at t is a
    deterministic function of the single order statistic V_{n-k:n}; this
    evaluates that function, standardized by the true location/scale at
    t.  It must agree with the simulation pipeline to float precision.
    """
    if not isinstance(model, ParetoPower):
        raise TypeError("the closed-form error is specific to the power model")
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    pts = grid.points
    m = (k / n) * v_threshold
    gamma_t = model.gamma(t)

    j = int(np.searchsorted(pts, t, side="left"))
    if j == 0:  # t <= t_1: constant extension, all weight on the first node
        w_left, g_left, g_right = 1.0, model.gamma(pts[0]), model.gamma(pts[0])
    elif j == pts.size:  # t > t_j: all weight on the last node
        w_left, g_left, g_right = 1.0, model.gamma(pts[-1]), model.gamma(pts[-1])
    else:
        w_left = (pts[j] - t) / (pts[j] - pts[j - 1])
        g_left = model.gamma(pts[j - 1])
        g_right = model.gamma(pts[j])

    ratio = k / n
    term_left = m ** g_left * ratio ** (gamma_t - g_left) - 1.0
    term_right = m ** g_right * ratio ** (gamma_t - g_right) - 1.0
    return float((w_left * term_left + (1.0 - w_left) * term_right) / gamma_t)


def gamma_from_dict(spec: dict, grid: Grid | None = None,
                    n: int | None = None, k: int | None = None) -> GammaCurve:
    """Build a GammaCurve from a JSON-style spec dict."""
    kind = spec["kind"]
    if kind == "constant":
        return GammaCurve.constant(float(spec["value"]))
    if kind == "holder":
        return GammaCurve.holder(float(spec["base"]), float(spec["scale"]),
                                 float(spec.get("exponent", 1.0)))
    if kind == "rough":
        if grid is None or n is None or k is None:
            raise ValueError("rough gamma curve needs grid, n and k context")
        return GammaCurve.rough(grid, float(spec["base"]), float(spec["kappa"]), n, k)
    raise ValueError(f"unknown gamma curve kind {kind!r}")


def cov_from_dict(spec: dict) -> CovarianceSpec:
    family = spec["family"]
    if family == "exponential":
        return CovarianceSpec("exponential", float(spec["sigma2"]), ell=float(spec["ell"]))
    if family == "fbm":
        return CovarianceSpec("fbm", float(spec["sigma2"]), hurst=float(spec["hurst"]))
    raise ValueError(f"unknown covariance family {family!r}")


def model_from_dict(spec: dict, grid: Grid | None = None,
                    n: int | None = None, k: int | None = None):
    """Build a model from a JSON-style spec dict (see the harness config)."""
    kind = spec["kind"]
    gamma = gamma_from_dict(spec["gamma"], grid=grid, n=n, k=k)
    if kind == "pareto-power":
        return ParetoPower(gamma)
    if kind == "exp-gaussian":
        return ExpGaussian(gamma, cov_from_dict(spec["cov"]))
    if kind == "complete-dependence":
        return CompleteDependenceFrechet(gamma)
    raise ValueError(f"unknown model kind {kind!r}")
