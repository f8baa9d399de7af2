"""Monte Carlo experiment harness: configuration, replication, aggregation.

Experiments run a model along an increasing n-schedule, estimate the
marginal curves (and optionally quantile curves, the exponent measure,
or the closed-form interpolation-error identity) on every replicate,
and persist per-replicate statistics plus deterministic aggregates.
Everything is reproducible from one master seed: each (n, replicate)
cell draws from its own derived substream, and aggregation is a fold
over the sorted cell order, so execution order never changes a value.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import expmeasure as em
from .conditions import recommend_mesh
from .grids import Grid, SampledPath, mesh
from .margins import DegenerateSampleError, estimate_margins, quantile_curves
from .models import (CompleteDependenceFrechet, ParetoPower, counterexample_error,
                     model_from_dict, simulate_matrix)
from .standardize import StandardizedPath, scaled_atoms, xi_true, xi_hat

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "ReplicateRow",
    "derive_seed",
    "run_experiment",
]

KNOWN_TARGETS = ("margins", "quantiles", "expmeasure", "counterexample")


class ReplicateRow(NamedTuple):
    n: int
    k: int
    replicate: int
    statistic_id: str
    value: float


@dataclass
class ExperimentConfig:
    """Declarative experiment description (JSON round-trippable).

    model: model spec dict, e.g. {"kind": "pareto-power",
        "gamma": {"kind": "constant", "value": 0.5}}.
    k_rule: {"kind": "power", "theta": 0.5, "scale": 1.0} gives
        k = ceil(scale * n**theta); {"kind": "explicit", "values": [...]}
        pins k per schedule entry.
    grid_rule: {"kind": "uniform", "cells": M}, {"kind": "explicit",
        "points": [...]}, or {"kind": "recommend", "alpha1": a1,
        "alpha2": a2} which sizes a uniform grid from the mesh-rate
        recommendation at each (n, k).
    params: target-specific knobs (eval_refine, quantile p factor,
        expmeasure c / reference atoms / level, counterexample point).
    """

    model: dict
    n_schedule: list
    k_rule: dict
    grid_rule: dict
    replicates: int
    seed: int
    targets: tuple = ("margins",)
    out_dir: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ns = [int(n) for n in self.n_schedule]
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n-schedule must be nonempty and increasing")
        self.n_schedule = ns
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        for t in self.targets:
            if t not in KNOWN_TARGETS:
                raise ValueError(f"unknown target {t!r}")
        self.targets = tuple(self.targets)
        for n in ns:
            k = self.k_for(n)
            if not 1 <= k < n:
                raise ValueError(f"k rule gives k={k} outside [1, n) at n={n}")

    def k_for(self, n: int) -> int:
        kind = self.k_rule.get("kind", "power")
        if kind == "power":
            scale = float(self.k_rule.get("scale", 1.0))
            theta = float(self.k_rule.get("theta", 0.5))
            return int(np.ceil(scale * n ** theta))
        if kind == "explicit":
            return int(self.k_rule["values"][self.n_schedule.index(n)])
        raise ValueError(f"unknown k rule {kind!r}")

    def grid_for(self, n: int, k: int) -> Grid:
        kind = self.grid_rule.get("kind", "uniform")
        if kind == "uniform":
            return Grid.uniform(int(self.grid_rule["cells"]))
        if kind == "explicit":
            return Grid(self.grid_rule["points"])
        if kind == "recommend":
            rec = recommend_mesh(float(self.grid_rule["alpha1"]),
                                 float(self.grid_rule["alpha2"]), n, k)
            cells = int(np.ceil(1.0 / rec.recommended))
            cells = min(cells, int(self.grid_rule.get("max_cells", 100000)))
            return Grid.uniform(cells)
        raise ValueError(f"unknown grid rule {kind!r}")

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n_schedule": self.n_schedule,
            "k_rule": self.k_rule,
            "grid_rule": self.grid_rule,
            "replicates": self.replicates,
            "seed": self.seed,
            "targets": list(self.targets),
            "out_dir": self.out_dir,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            model=d["model"],
            n_schedule=d["n_schedule"],
            k_rule=d["k_rule"],
            grid_rule=d["grid_rule"],
            replicates=int(d["replicates"]),
            seed=int(d["seed"]),
            targets=tuple(d.get("targets", ("margins",))),
            out_dir=d.get("out_dir"),
            params=d.get("params", {}),
        )


def derive_seed(master, n_index: int, replicate: int, path: int = 0) -> int:
    """Collision-resistant deterministic seed for one unit of work.

    Built on seed-sequence spawning, so distinct (n_index, replicate,
    path) triples give independent substreams of the master stream.
    """
    ss = np.random.SeedSequence(entropy=master, spawn_key=(n_index, replicate, path))
    state = ss.generate_state(4, np.uint64)
    return int(state[0]) | int(state[1]) << 64 | int(state[2]) << 128 | int(state[3]) << 192


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    failures: list
    aggregates: dict

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["n,k,replicate,statistic_id,value"]
        lines += [f"{r.n},{r.k},{r.replicate},{r.statistic_id},{r.value:.17g}"
                  for r in self.rows]
        (out / "replicates.csv").write_text("\n".join(lines) + "\n")
        (out / "aggregate.json").write_text(json.dumps(self.aggregates, indent=2) + "\n")
        (out / "config-echo.json").write_text(
            json.dumps(self.config.to_dict(), indent=2) + "\n")


def aggregate_rows(rows, failures, config: ExperimentConfig) -> dict:
    """Deterministic fold of per-replicate rows into summary statistics.

    Recomputable from replicates.csv alone; the harness round-trip test
    relies on that.
    """
    rows = sorted(rows)
    per_stat: dict[str, dict[int, list[float]]] = {}
    for r in rows:
        per_stat.setdefault(r.statistic_id, {}).setdefault(r.n, []).append(r.value)
    stats = {}
    for sid, by_n in per_stat.items():
        per_n = []
        for n in sorted(by_n):
            vals = np.asarray(by_n[n])
            per_n.append({
                "n": n,
                "mean": float(np.mean(vals)),
                "sd": float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0,
                "median": float(np.median(vals)),
                "count": int(vals.size),
            })
        means = [e["mean"] for e in per_n]
        medians = [e["median"] for e in per_n]
        stats[sid] = {
            "per_n": per_n,
            "mean_monotone_decreasing": all(b < a for a, b in zip(means, means[1:])),
            "median_monotone_decreasing": all(b < a for a, b in zip(medians, medians[1:])),
        }
    return {
        "schedule": [
            {"n": n, "k": config.k_for(n), "lambda_clt": config.k_for(n) ** -0.5}
            for n in config.n_schedule
        ],
        "replicates": config.replicates,
        "seed": config.seed,
        "statistics": stats,
        "failures": {"count": len(failures),
                     "items": [list(f) for f in sorted(failures)]},
    }


def _eval_mesh(grid: Grid, refine: int) -> np.ndarray:
    padded = np.concatenate(([0.0], grid.points, [1.0]))
    pieces = [np.linspace(padded[i], padded[i + 1], refine, endpoint=False)
              for i in range(padded.size - 1)]
    pieces.append(np.array([1.0]))
    return np.unique(np.concatenate(pieces))


def _margin_statistics(model, curves, n, k, t_eval):
    u, a, g = model.true_marginals(t_eval, n / k)
    sup_g = float(np.max(np.abs(curves.gamma_star(t_eval) - g)))
    sup_a = float(np.max(np.abs(curves.a_star(t_eval) / a - 1.0)))
    sup_u = float(np.max(np.abs((curves.u_star(t_eval) - u) / a)))
    sqrt_k = np.sqrt(k)
    return {
        "sup_gamma_err": sup_g,
        "sup_scale_rel_err": sup_a,
        "sup_location_std_err": sup_u,
        "sup_gamma_err_times_sqrt_k": sup_g * sqrt_k,
        "sup_scale_rel_err_times_sqrt_k": sup_a * sqrt_k,
        "sup_location_std_err_times_sqrt_k": sup_u * sqrt_k,
    }


def _quantile_statistics(model, curves, n, k, t_eval, params):
    p = float(params.get("quantile_p_factor", 0.1)) * k / n
    x_star, x_interp = quantile_curves(curves, n, k, p)
    u_p, _, _ = model.true_marginals(t_eval, 1.0 / p)
    _, a_nk, _ = model.true_marginals(t_eval, n / k)
    return {
        "sup_quantile_star_err": float(np.max(np.abs((x_star(t_eval) - u_p) / a_nk))),
        "sup_quantile_interp_err": float(np.max(np.abs((x_interp(t_eval) - u_p) / a_nk))),
    }


def _expmeasure_statistics(model, grid, x, curves, n, k, params):
    c = float(params.get("c", 1.0))
    level = float(params.get("level", 2.0))
    m_ref = int(params.get("reference_atoms", 512))
    use_true = params.get("standardization", "true") == "true"
    if use_true:
        surv = np.asarray(model.survival(grid.points, x), dtype=float)
        if np.any(surv <= 0.0):
            raise ValueError("support boundary hit during standardization")
        std_paths = [StandardizedPath(grid, row) for row in 1.0 / surv]
    else:
        std_paths = [xi_hat(curves, SampledPath(grid, row), n, k) for row in x]
    atoms = scaled_atoms(std_paths, n, k)
    measure = em.PointMeasure(atoms, 1.0 / k)
    e_min = em.TestSet("min-exceedance", grid.points, level)
    ref = em.reference_complete_dependence(c, m_ref)
    out = {
        "nu_min_exceedance_err": abs(em.nu_hat(measure, e_min) - ref.closed_form(e_min)),
        "dc_to_reference": em.dc_distance(measure, ref.measure, c),
    }
    return out


def _counterexample_statistics(model, grid, x, curves, n, k, params):
    pts = grid.points
    if "t" in params:
        t_mid = float(params["t"])
    else:
        j = pts.size // 2
        t_mid = 0.5 * (pts[j - 1] + pts[j])
    u_t, a_t, _ = model.true_marginals(t_mid, n / k)
    pipeline = (curves.u_star(t_mid) - u_t) / a_t
    part = np.partition(x[:, 0], n - k - 1)
    v_threshold = part[n - k - 1] ** (1.0 / model.gamma(pts[0]))
    closed = counterexample_error(model, grid, n, k, t_mid, v_threshold)
    return {
        "midpoint_location_err": float(pipeline),
        "counterexample_identity_gap": float(abs(pipeline - closed)),
    }


def _run_cell(config: ExperimentConfig, n_index: int, replicate: int):
    n = config.n_schedule[n_index]
    k = config.k_for(n)
    grid = config.grid_for(n, k)
    model = model_from_dict(config.model, grid=grid, n=n, k=k)
    seed = derive_seed(config.seed, n_index, replicate)
    x = simulate_matrix(model, grid, n, seed)
    t_eval = _eval_mesh(grid, int(config.params.get("eval_refine", 8)))

    stats: dict[str, float] = {}
    curves = None
    if set(config.targets) & {"margins", "quantiles", "counterexample"} or (
            "expmeasure" in config.targets
            and config.params.get("standardization", "true") == "estimated"):
        curves = estimate_margins((grid, x), k)
    if "margins" in config.targets:
        stats.update(_margin_statistics(model, curves, n, k, t_eval))
    if "quantiles" in config.targets:
        stats.update(_quantile_statistics(model, curves, n, k, t_eval, config.params))
    if "expmeasure" in config.targets:
        stats.update(_expmeasure_statistics(model, grid, x, curves, n, k, config.params))
    if "counterexample" in config.targets:
        stats.update(_counterexample_statistics(model, grid, x, curves, n, k, config.params))
    return [ReplicateRow(n, k, replicate, sid, val) for sid, val in sorted(stats.items())]


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run every (n, replicate) cell; aggregate; optionally persist.

    A degenerate-sample failure in one replicate is recorded and
    excluded from aggregates rather than aborting the run (heavy-tailed
    samples occasionally tie at desk scale).
    """
    cells = [(i, r) for i in range(len(config.n_schedule))
             for r in range(config.replicates)]
    rows: list[ReplicateRow] = []
    failures: list[tuple] = []

    def work(cell):
        i, r = cell
        try:
            return _run_cell(config, i, r), None
        except DegenerateSampleError as exc:
            return [], (config.n_schedule[i], r, str(exc))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]
    for cell_rows, failure in results:
        rows.extend(cell_rows)
        if failure is not None:
            failures.append(failure)

    rows.sort()
    aggregates = aggregate_rows(rows, failures, config)
    result = ExperimentResult(config=config, rows=rows, failures=failures,
                              aggregates=aggregates)
    if config.out_dir:
        result.write(config.out_dir)
    return result
